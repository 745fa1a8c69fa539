use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::KickPotential;
use crate::error::{Error, Result};
use crate::heteroclinic::ControlOrbit;
use crate::quantum::operator::{
    controlled_half_steps, floquet_uncontrolled, shift_operator, unwind_operator, Representation,
};
use crate::quantum::space::{build_gaussian, QuantumState, TorusQuantization, WavePacketSpec};
use crate::scheme::ControlScheme;
use crate::torus::{AccumulatedStability, TorusAction};

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationPlan {
    pub scheme: ControlScheme,
    pub orbit: ControlOrbit,
    /// Number of full steps `l`.
    pub steps: usize,
    /// Apply the entry shift `α → x(0)` and exit shift `x(l) → β`.
    pub apply_shifts: bool,
    /// Steps between unwinding operators (`UnwindM` only).
    pub unwind_period: usize,
}

impl PropagationPlan {
    /// Full-length plan along `orbit` with shifts and unwinding every step.
    pub fn along(orbit: ControlOrbit, scheme: ControlScheme) -> Self {
        Self {
            scheme,
            steps: orbit.tau,
            orbit,
            apply_shifts: true,
            unwind_period: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.apply_shifts && self.steps != self.orbit.tau {
            return Err(Error::InvalidParameter(format!(
                "shifted plans run the whole orbit: steps = {} but tau = {}",
                self.steps, self.orbit.tau
            )));
        }
        if self.steps > self.orbit.tau {
            return Err(Error::InvalidParameter(format!(
                "steps = {} exceeds the orbit length {}",
                self.steps, self.orbit.tau
            )));
        }
        if self.scheme == ControlScheme::UnwindM && self.unwind_period == 0 {
            return Err(Error::InvalidParameter("unwind_period must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub final_state: QuantumState,
    /// `1 − |⟨β|ψ⟩|²` for normalized states.
    pub delta: f64,
    /// States after the entry shift and after each full step (`steps + 1` entries).
    pub trace: Vec<QuantumState>,
}

/// Runs `plan` from `initial` and scores the result against `target`.
pub fn propagate(
    plan: &PropagationPlan,
    tq: &TorusQuantization,
    initial: &QuantumState,
    target: &QuantumState,
) -> Result<Propagation> {
    plan.validate()?;
    tq.check_len(initial.len())?;
    tq.check_len(target.len())?;
    if tq.action() != TorusAction::Doubled {
        return Err(Error::InvalidParameter(
            "controlled propagation runs on the doubled torus".into(),
        ));
    }
    let orbit = &plan.orbit;
    let params = orbit.params();
    let mut psi = initial.amplitudes.clone();

    if plan.apply_shifts {
        let (dq, dp) = orbit.entry_shift();
        let alpha = orbit.alpha.unwrapped();
        shift_operator(tq, dq, dp, alpha).apply_in_place(tq, &mut psi)?;
    }
    let mut trace = Vec::with_capacity(plan.steps + 1);
    trace.push(QuantumState::new(psi.clone()));

    let floquet = match plan.scheme {
        ControlScheme::Uncontrolled | ControlScheme::UnwindM => {
            Some(floquet_uncontrolled(tq, &params))
        }
        _ => None,
    };
    let mut acc = AccumulatedStability::identity();
    for n in 0..plan.steps {
        match plan.scheme {
            ControlScheme::Uncontrolled => {
                floquet.as_ref().unwrap().apply_in_place(tq, &mut psi)?;
            }
            ControlScheme::UnwindM => {
                floquet.as_ref().unwrap().apply_in_place(tq, &mut psi)?;
                acc.push_uncontrolled(orbit.points_full[n].unwrapped().0, &params);
                if (n + 1) % plan.unwind_period == 0 || n + 1 == plan.steps {
                    let (qc, pc) = orbit.points_full[n + 1].unwrapped();
                    unwind_operator(tq, &acc.matrix(), qc, pc)?.apply_in_place(tq, &mut psi)?;
                    acc = AccumulatedStability::identity();
                }
            }
            scheme => {
                let (u1, u2) =
                    controlled_half_steps(tq, orbit, scheme, n, Representation::Factored)?;
                u1.apply_in_place(tq, &mut psi)?;
                u2.apply_in_place(tq, &mut psi)?;
            }
        }
        trace.push(QuantumState::new(psi.clone()));
    }

    if plan.apply_shifts {
        let (dq, dp) = orbit.exit_shift();
        let end = orbit.points_full[plan.steps].unwrapped();
        shift_operator(tq, dq, dp, end).apply_in_place(tq, &mut psi)?;
    }
    let final_state = QuantumState::new(psi);
    let delta = 1.0 - target.fidelity(&final_state);
    Ok(Propagation {
        final_state,
        delta,
        trace,
    })
}

/// Δ for one `(N, scheme)` pair with Gaussians at the orbit's endpoints.
pub fn targeting_error(
    n: usize,
    scheme: ControlScheme,
    orbit: &ControlOrbit,
    unwind_period: usize,
) -> Result<f64> {
    let tq = TorusQuantization::doubled(n)?;
    let (qa, pa) = orbit.alpha.unwrapped();
    let (qb, pb) = orbit.beta.unwrapped();
    let initial = build_gaussian(WavePacketSpec::new(qa, pa), &tq)?;
    let target = build_gaussian(WavePacketSpec::new(qb, pb), &tq)?;
    let plan = PropagationPlan {
        unwind_period,
        ..PropagationPlan::along(orbit.clone(), scheme)
    };
    Ok(propagate(&plan, &tq, &initial, &target)?.delta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    /// Planck cell `h = 2/N`.
    pub h: f64,
    pub scheme: ControlScheme,
    pub delta: Option<f64>,
    pub status: String,
}

/// Δ over every `(N, scheme)` pair, computed in parallel and returned
/// sorted by `N`, then scheme. Failures are recorded per row.
pub fn sweep_dimension(
    ns: &[usize],
    schemes: &[ControlScheme],
    orbit: &ControlOrbit,
    unwind_period: usize,
) -> Result<Vec<SweepRow>> {
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "dimension list must be strictly ascending".into(),
        ));
    }
    let jobs: Vec<(usize, ControlScheme)> = ns
        .iter()
        .flat_map(|&n| schemes.iter().map(move |&s| (n, s)))
        .collect();
    let mut rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(n, scheme)| {
            let (delta, status) = match targeting_error(n, scheme, orbit, unwind_period) {
                Ok(d) => (Some(d), "ok".to_string()),
                Err(e) => (None, e.to_string()),
            };
            SweepRow {
                n,
                h: TorusAction::Doubled.area() / n as f64,
                scheme,
                delta,
                status,
            }
        })
        .collect();
    rows.sort_by(|a, b| a.n.cmp(&b.n).then(a.scheme.cmp(&b.scheme)));
    Ok(rows)
}

/// The kick phase `−V(q)/ħ` of the full-step potential of step `n`.
pub fn full_kick_phase(
    tq: &TorusQuantization,
    orbit: &ControlOrbit,
    scheme: ControlScheme,
    n: usize,
    q: f64,
) -> Result<f64> {
    let v = KickPotential::full(scheme, orbit.points_full[n].unwrapped().0, orbit.params())?;
    Ok(-v.value(q) / tq.hbar())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heteroclinic::table_one;

    #[test]
    fn empty_plan_is_exact_identity() {
        let tq = TorusQuantization::doubled(50).unwrap();
        let full = vec![(0.0, 0.0); 3];
        let orbit = ControlOrbit::from_full_points(8.0, &full, (0.0, 0.0), (0.0, 0.0)).unwrap();
        let plan = PropagationPlan {
            scheme: ControlScheme::SolA,
            orbit,
            steps: 0,
            apply_shifts: false,
            unwind_period: 1,
        };
        let psi = build_gaussian(WavePacketSpec::new(0.0, 0.0), &tq).unwrap();
        let out = propagate(&plan, &tq, &psi, &psi).unwrap();
        assert_eq!(out.delta, 0.0);
        assert_eq!(out.trace.len(), 1);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let tq = TorusQuantization::doubled(50).unwrap();
        let other = TorusQuantization::doubled(60).unwrap();
        let plan = PropagationPlan::along(table_one(), ControlScheme::SolA);
        let a = build_gaussian(WavePacketSpec::new(0.5, 0.0), &tq).unwrap();
        let b = build_gaussian(WavePacketSpec::new(0.0, 0.0), &other).unwrap();
        assert!(matches!(
            propagate(&plan, &tq, &a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sweep_requires_ascending_dimensions() {
        let orbit = table_one();
        assert!(sweep_dimension(&[100, 50], &[ControlScheme::SolA], &orbit, 1).is_err());
        let rows = sweep_dimension(&[20, 50], &[ControlScheme::SolA], &orbit, 1).unwrap();
        assert!(rows[0].delta.is_none() && rows[0].status.contains("tails"));
        assert!(rows[1].delta.is_some());
    }
}
