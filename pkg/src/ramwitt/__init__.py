"""Exact arithmetic for ramified Witt vectors, Lubin-Tate formal groups,
prism-style delta-ring verification, and etale phi-modules over finite
Witt rings.

All arithmetic tracks pi-adic precision and T-adic truncation explicitly;
every ideal-membership or congruence claim produced by the verification
suites carries an exactness certificate that is re-checked by
multiplication.
"""

from .base import (
    CONWAY,
    FqField,
    OLApprox,
    OLConfig,
    OLRing,
    UnramExt,
    ol_make,
    teichmuller_lift,
    unram_frobenius,
    val_divide_pi,
)
from .config import RunConfig
from .errors import RamwittError
from .lubintate import (
    LTGroup,
    cyclotomic_frobenius_series,
    default_frobenius_series,
    gamma_operator,
    lt_check_associativity,
    lt_endomorphism,
    lt_group_law,
    prism_witness,
    qn_series,
)
from .prism import (
    BKTwistClass,
    DeltaRing,
    check_delta_axioms,
    check_log_additivity,
    check_qn_intersection,
    gen_m,
    is_distinguished,
    log_prism,
    log_transition_check,
    series_delta_ring,
)
from .phimod import (
    PhiModule,
    base_change,
    brute_force_fixed_set,
    fixed_points,
    herr_h0_h1,
    is_etale,
    stabilization_check,
)
from .report import Report, emit_report
from .series import (
    SeriesRing,
    TruncSeries,
    TwoVarSeries,
    series_add,
    series_compose,
    series_divide_exact,
    series_invert_unit,
    series_mul,
)
from .suites import run_suite
from .tower import (
    TiltRing,
    TowerLevel,
    TowerRing,
    iota_n,
    iota_witt,
    theta,
    tilt_omega_bar,
    tower_level,
    verify_theta_phi_iota,
)
from .witt import (
    UniversalPolyCache,
    WittRing,
    WittVec,
    build_universal_cache,
    delta_from_w2,
    delta_section,
    ghost_map,
    witt_add,
    witt_frobenius,
    witt_mul,
    witt_verschiebung,
)

__version__ = "0.1.0"
