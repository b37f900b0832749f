"""Pinned discrete conventions shared across the engine.

The two-spinor formalism leaves a handful of choices open: epsilon signs,
where each named coefficient sits inside the raw connection arrays, and the
normalization of the curvature-spinor decomposition. Every tunable sign,
factor and permutation below was fixed once by dev/calibrate.py, which
enumerates the candidates and keeps the single choice surviving all
closed-form rescaling and reassembly checks. The rest (epsilon matrix,
frame dyads, name grids, weight presets) are definitions the calibration
treats as fixed. Rerun that script instead of editing values by hand; bump
CONVENTIONS_VERSION on any change.
"""

CONVENTIONS_VERSION = 1

# ---------------------------------------------------------------------------
# spinor index conventions
#
# eps_{01} = +1 for both spinor families, and the same numeric matrix is used
# with upper indices. Lowering contracts on the left: xi_A = xi^B eps_{BA};
# raising on the right: xi^A = eps^{AB} xi_B.
EPSILON = ((0.0, 1.0), (-1.0, 0.0))

# Frame dyads relative to their own basis. The primed frame lists the
# distinguished null-plane spinor first.
ALPHA_UP = (1.0, 0.0)
BETA_UP = (0.0, 1.0)
PI_UP = (1.0, 0.0)
XI_UP = (0.0, 1.0)

# ---------------------------------------------------------------------------
# named coefficient tables
#
# Layout of the two 4x4 tables. Each row is one frame direction; the exact
# direction order per grid is given by the ROW_PERM constants below.
UNPRIMED_NAMES = (
    ("epsilon", "kappa", "tau_prime", "gamma_prime"),
    ("alpha", "rho", "sigma_prime", "beta_prime"),
    ("beta", "sigma", "rho_prime", "alpha_prime"),
    ("gamma", "tau", "kappa_prime", "epsilon_prime"),
)
PRIMED_NAMES = tuple(tuple(n + "_tilde" for n in row) for row in UNPRIMED_NAMES)

# Column j of a table holds the connection component with (differentiated
# element B, output component C) = COLUMN_SLOTS[j], scaled by the matching
# sign. TABLES_TRANSPOSED would swap the roles of B and C globally.
COLUMN_SLOTS = ((0, 0), (0, 1), (1, 0), (1, 1))
UNPRIMED_COLUMN_SIGNS = (1.0, 1.0, 1.0, 1.0)
PRIMED_COLUMN_SIGNS = (1.0, 1.0, 1.0, 1.0)
TABLES_TRANSPOSED = False

# Row r of a named grid differentiates along tetrad row ROW_PERM[r]. The
# primed grid runs through the directions in soldering order; the unprimed
# grid interleaves them with the primed frame label running fastest first,
# which swaps the middle two rows.
UNPRIMED_ROW_PERM = (0, 2, 1, 3)
PRIMED_ROW_PERM = (0, 1, 2, 3)

# ---------------------------------------------------------------------------
# curvature-spinor decomposition
#
# The totally-symmetric parts are extracted by contracting the dyadized
# Riemann tensor with one epsilon pair and symmetrizing; 1/4 is forced by
# eps-pair completeness. The remaining constants were pinned numerically.
WEYL_PAIR_FACTOR = 0.25
# sign s in   quartic block = symmetric part + s * scalar-part * eps-pairs
CURVATURE_TRACE_SIGN = -1.0
# factor f in   trace-free mixed spinor = f * (Ricci - S/4 g) dyadized
RICCI_SPINOR_FACTOR = 0.5
# factor applied to the mixed spinor when reassembling the Riemann tensor;
# the quarter-contraction route gives exactly minus the Ricci route
MIXED_BLOCK_FACTOR = -1.0

# ---------------------------------------------------------------------------
# conformal weight presets (v0, v1, w0, w1)
#
# Both presets keep the rescaled dyads normalized; they differ in which power
# of the factor multiplies the distinguished primed spinor (-3/2 vs +1/2).
WEIGHT_PRESETS = {
    "plane-down": (-0.5, -0.5, -1.5, 0.5),
    "plane-up": (-0.5, -0.5, 0.5, -1.5),
}

# ---------------------------------------------------------------------------
# affine-inverse-factor machinery
#
# Directional derivative along the affine combination w: the operator
# s * K^D delta_D, optionally normalized by the pairing scalar so that it
# acts as d/dw on functions of w alone.
AFFINE_DERIV_SIGN = 1.0
AFFINE_DERIV_NORMALIZED = True

# ---------------------------------------------------------------------------
# null-geometry scale conventions
#
# The obstruction covector extracted in the fixed reference dyad equals
# this power of the conformal factor times the plane gradient of the
# factor (calibrated; the plane-gradient closed form is the oracle).
SVECTOR_OMEGA_POWER = -1.0

# chart-change sign branch for the square root of det(D)
CHI_SIGN_BRANCH = 1.0


def render() -> str:
    """Versioned plain-text dump of every pinned convention."""
    lines = [
        "walkergeo conventions v%d" % CONVENTIONS_VERSION,
        "",
        "epsilon_{01} = +1 (both families); lower xi_A = xi^B eps_BA,"
        " raise xi^A = eps^AB xi_B",
        "frame dyads: alpha=%s beta=%s pi=%s xi=%s"
        % (ALPHA_UP, BETA_UP, PI_UP, XI_UP),
        "",
        "coefficient tables: row perms %s / %s over soldering directions,"
        % (UNPRIMED_ROW_PERM, PRIMED_ROW_PERM),
        "column slots (B, C) = %s%s"
        % (COLUMN_SLOTS, " transposed" if TABLES_TRANSPOSED else ""),
        "unprimed column signs: %s" % (UNPRIMED_COLUMN_SIGNS,),
        "primed column signs:   %s" % (PRIMED_COLUMN_SIGNS,),
        "unprimed names: %s" % "; ".join(",".join(r) for r in UNPRIMED_NAMES),
        "primed names:   %s" % "; ".join(",".join(r) for r in PRIMED_NAMES),
        "",
        "curvature decomposition: pair factor %.3f, trace sign %+.0f,"
        % (WEYL_PAIR_FACTOR, CURVATURE_TRACE_SIGN),
        "  ricci-spinor factor %.3f, mixed reassembly factor %+.3f"
        % (RICCI_SPINOR_FACTOR, MIXED_BLOCK_FACTOR),
        "",
        "weight presets: %s"
        % "; ".join("%s=%s" % kv for kv in sorted(WEIGHT_PRESETS.items())),
        "affine derivation: sign %+.0f, normalized %s"
        % (AFFINE_DERIV_SIGN, AFFINE_DERIV_NORMALIZED),
        "obstruction covector factor power: %+.1f" % SVECTOR_OMEGA_POWER,
        "chart sqrt branch: %+.0f" % CHI_SIGN_BRANCH,
    ]
    return "\n".join(lines) + "\n"
