//! The full convergence certificate for one spreading run: midline decay,
//! ratio gate, barrier search, asymptotic shift and error envelope on both
//! sides of the support.

use serde::{Deserialize, Serialize};

use crate::analysis::fm::{fm_error_profile, shift_floor, FmOptions, FmReport};
use crate::analysis::midline::{midline_convergence, MidlineReport};
use crate::analysis::ratios::{check_monotone_ratios, RatioReport};
use crate::analysis::shift::{front_shift_estimate, ShiftReport};
use crate::analysis::spread::SpreadingRun;
use crate::analysis::supersub::{check_supersub, CertifyOptions, CertifyReport};
use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::renorm::WaveProfile;
use crate::solver::StationaryProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub eps0: f64,
    /// Midline interval speed as a fraction of `c*`.
    pub midline_fraction: f64,
    pub shift_periods: usize,
    pub certify: CertifyOptions,
    pub fm: FmOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            eps0: 0.05,
            midline_fraction: 0.5,
            shift_periods: 5,
            certify: CertifyOptions::default(),
            fm: FmOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Right,
    Left,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SideReport {
    pub side: Side,
    pub c_star: f64,
    pub midline: MidlineReport,
    pub barriers: CertifyReport,
    pub shift: ShiftReport,
    /// Residual level below which the shift counts as settled.
    pub shift_floor: f64,
    pub shift_settled: bool,
    pub fm: FmReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gates {
    pub ratios: bool,
    pub midline: bool,
    pub barriers: bool,
    pub envelope: bool,
    pub shift: bool,
}

impl Gates {
    pub fn all(&self) -> bool {
        self.ratios && self.midline && self.barriers && self.envelope && self.shift
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificationReport {
    pub ratios: RatioReport,
    pub right: SideReport,
    pub left: SideReport,
    pub gates: Gates,
}

/// Minimum `R^2` accepted for the midline fit.
pub const MIDLINE_R2: f64 = 0.98;
/// Fraction of points inside the error envelope.
pub const ENVELOPE_FRACTION: f64 = 0.99;

/// One side of the support; the left side is passed in mirrored form.
pub fn certify_side(
    spec: &ProblemSpec,
    side: Side,
    w: &WaveProfile,
    sr: &SpreadingRun,
    p0: &StationaryProfile,
    ratios: &RatioReport,
    opts: &PipelineOptions,
) -> Result<SideReport> {
    let t_end = sr
        .run
        .trajectory
        .last()
        .ok_or_else(|| Error::Data("empty run".into()))?
        .t;
    let midline = midline_convergence(
        spec,
        &sr.run.trajectory,
        p0,
        opts.midline_fraction * w.c_star,
        0.5 * t_end,
    )?;
    let barriers = check_supersub(spec, w, sr, ratios, midline.fit.delta, &opts.certify)?;
    let shift = front_shift_estimate(
        &sr.run.trace,
        w,
        barriers.shift_window,
        0.5 * t_end,
        opts.shift_periods,
    )?;
    let floor = shift_floor(w.dx);
    let shift_settled = shift.settled(floor);
    let fm = fm_error_profile(
        spec,
        &sr.run.trajectory,
        w,
        shift.t_star,
        barriers.t_match,
        &opts.fm,
    )?;
    Ok(SideReport {
        side,
        c_star: w.c_star,
        midline,
        barriers,
        shift,
        shift_floor: floor,
        shift_settled,
        fm,
    })
}

/// Mirrored inputs for the left side: spec, wave and stationary state of
/// `x -> -x`.
pub struct LeftInputs<'a> {
    pub spec: &'a ProblemSpec,
    pub wave: &'a WaveProfile,
    pub p0: &'a StationaryProfile,
}

/// Certifies both sides concurrently. The ratio gate runs first and
/// `lambda0 <= 0` is an error.
pub fn certify(
    spec: &ProblemSpec,
    wave: &WaveProfile,
    left: LeftInputs<'_>,
    sr: &SpreadingRun,
    p0: &StationaryProfile,
    opts: &PipelineOptions,
) -> Result<CertificationReport> {
    let ratios = check_monotone_ratios(spec, opts.eps0);
    if !(ratios.lambda0 > 0.0) {
        return Err(Error::RatioGate {
            lambda0: ratios.lambda0,
        });
    }
    let mirrored = sr.mirrored()?;
    let left_ratios = check_monotone_ratios(left.spec, opts.eps0);
    let (right, left) = rayon::join(
        || certify_side(spec, Side::Right, wave, sr, p0, &ratios, opts),
        || {
            certify_side(
                left.spec,
                Side::Left,
                left.wave,
                &mirrored,
                left.p0,
                &left_ratios,
                opts,
            )
        },
    );
    let (right, left) = (right?, left?);
    let both = |f: &dyn Fn(&SideReport) -> bool| f(&right) && f(&left);
    let gates = Gates {
        ratios: ratios.passes(),
        midline: both(&|s| s.midline.fit.delta > 0.0 && s.midline.fit.r2 >= MIDLINE_R2),
        barriers: both(&|s| s.barriers.certified(&opts.certify)),
        envelope: both(&|s| {
            s.fm.omega1.delta > 0.0
                && s.fm.omega2.delta > 0.0
                && s.fm.envelope_fraction >= ENVELOPE_FRACTION
        }),
        shift: both(&|s| s.shift_settled),
    };
    Ok(CertificationReport {
        ratios,
        right,
        left,
        gates,
    })
}
