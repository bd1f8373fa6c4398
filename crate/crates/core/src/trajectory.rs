//! Recorded trajectory frames shared by all engines.

use crate::analytics::geometry::conserved_from_angles;
use crate::trimer::fold_omega;

/// One recorded sample of a trajectory.
///
/// `omega` and `phi` are lifted (continuous) angles so that `q1` and `q2`
/// can be followed across the overlap point; use [`Frame::folded_omega`]
/// for histograms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub t: f64,
    pub omega: f64,
    pub phi: f64,
    pub theta: [f64; 3],
    pub q1: f64,
    pub q2: f64,
}

impl Frame {
    pub fn new(t: f64, omega: f64, phi: f64, theta: [f64; 3]) -> Self {
        let (q1, q2) = conserved_from_angles(omega, phi, theta);
        Self {
            t,
            omega,
            phi,
            theta,
            q1,
            q2,
        }
    }

    pub fn folded_omega(&self) -> f64 {
        fold_omega(self.omega)
    }

    pub fn wrapped_phi(&self) -> f64 {
        self.phi.rem_euclid(std::f64::consts::TAU)
    }
}

/// Largest drift of the conserved quantities relative to the first frame.
pub fn conserved_drift(frames: &[Frame]) -> (f64, f64) {
    let Some(first) = frames.first() else {
        return (0.0, 0.0);
    };
    frames.iter().fold((0.0f64, 0.0f64), |(a, b), f| {
        (a.max((f.q1 - first.q1).abs()), b.max((f.q2 - first.q2).abs()))
    })
}

/// Folded `ω` samples after discarding the leading `warmup_fraction`.
pub fn omega_samples(frames: &[Frame], warmup_fraction: f64) -> Vec<f64> {
    let skip = (frames.len() as f64 * warmup_fraction).ceil() as usize;
    frames.iter().skip(skip).map(Frame::folded_omega).collect()
}
