//! Scaling experiments: blow-up rescalings, the Liouville probe, the
//! maximal-regularity sweep and the Hölder-to-Sobolev interpolation check.

mod blowup;
mod interp;
mod liouville;
mod maxreg;

pub use blowup::{
    blowup_inverse, blowup_transform, norm_identity, normalization_check, rescaled_residual,
    worst_pair_selection, BlowupParams, NormIdentity, Rescaled, Selection, SelectionCase,
    SelectionKind, Variant,
};
pub use interp::{interpolation_bound_check, InterpolationReport};
pub use liouville::{
    liouville_budget, liouville_probe, LiouvilleProbe, LiouvilleRow, ProbeConfig, MONOTONE_SLACK,
};
pub use maxreg::{
    maxreg_sweep, MaxregConfig, MaxregRow, MaxregSweep, RatioSpread, RowStatus, SourceFamily,
    SPREAD_BOUND,
};
