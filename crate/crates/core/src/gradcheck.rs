//! Finite-difference verification of tape gradients.
//!
//! `grad_check` takes a closure that builds a scalar loss from the current
//! parameter values, runs one reverse sweep, then perturbs every parameter
//! element with central differences and compares.  The closure must be
//! deterministic — it is evaluated twice up front and rejected if the two
//! losses differ by a single bit (dropout or any other stochastic piece must
//! be frozen before checking).
//!
//! A probe that straddles a kink (`relu`, `abs`) reports a wrong slope no
//! matter how correct the analytic gradient is, so a mismatch triggers step
//! refinement: halving the step either clears the kink (the error vanishes)
//! or keeps the successive estimates disagreeing with *each other*, in
//! which case the element is skipped as non-smooth and counted on the
//! report.  A genuine mismatch survives refinement — the estimates settle
//! on a value and keep disagreeing with the analytic one.

use crate::params::{ParamId, ParamSet};
use crate::tape::{Tape, ValueId};
use thiserror::Error;

/// Maximum step halvings tried when a probe disagrees with the analytic
/// gradient before the element is classified as failed or non-smooth.
const MAX_REFINE: usize = 4;

#[derive(Debug, Error)]
pub enum GradCheckError {
    #[error(
        "loss is not deterministic: two evaluations gave {first} and {second}; \
         freeze all stochastic parts before gradient checking"
    )]
    NonDeterministic { first: f64, second: f64 },
}

/// Worst element of one parameter.
#[derive(Clone, Debug)]
pub struct ParamReport {
    pub name: String,
    pub max_rel_err: f64,
    /// Flat index of the worst element.
    pub worst_index: usize,
    /// Analytic gradient at the worst element.
    pub analytic: f64,
    /// Central-difference estimate at the worst element.
    pub numeric: f64,
}

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub params: Vec<ParamReport>,
    pub step: f64,
    pub tol: f64,
    /// Elements skipped because the loss is non-smooth there: successive
    /// step halvings never agreed with each other, so no central-difference
    /// estimate exists to compare against.
    pub nonsmooth_skips: usize,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.params.iter().all(|p| p.max_rel_err < self.tol)
    }

    /// Parameter with the largest relative error (the report is never empty
    /// for a model with parameters).
    pub fn worst(&self) -> &ParamReport {
        self.params
            .iter()
            .max_by(|a, b| a.max_rel_err.total_cmp(&b.max_rel_err))
            .expect("grad check report has no parameters")
    }

    pub fn failures(&self) -> impl Iterator<Item = &ParamReport> {
        self.params.iter().filter(|p| p.max_rel_err >= self.tol)
    }
}

/// Relative error used throughout: `|a - b| / (|a| + |b| + 1e-6)`.
///
/// The floor turns the comparison absolute once both gradients drop below
/// ~1e-6: central differences carry roundoff noise of order
/// `eps · |loss| / step` ≈ 1e-12, so demanding a *relative* match of
/// near-zero gradients would reject correct implementations.  With the
/// floor, near-zero gradients must still agree to ~1e-10 absolute.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / (a.abs() + b.abs() + 1e-6)
}

/// Checks every element of every parameter in `set` against central
/// differences of the loss built by `build`.
///
/// `build` receives the current parameters and must return a fresh tape plus
/// the id of a scalar loss on it.
pub fn grad_check<F>(
    set: &mut ParamSet,
    build: F,
    step: f64,
    tol: f64,
) -> Result<GradCheckReport, GradCheckError>
where
    F: Fn(&ParamSet) -> (Tape, ValueId),
{
    let loss_of = |set: &ParamSet| {
        let (tape, loss) = build(set);
        tape.value(loss).at(0)
    };

    let first = loss_of(set);
    let second = loss_of(set);
    if first.to_bits() != second.to_bits() {
        return Err(GradCheckError::NonDeterministic { first, second });
    }

    // One analytic sweep.
    let (mut tape, loss) = build(set);
    tape.backward(loss);
    let analytic: Vec<Vec<f64>> = set
        .iter()
        .map(|(id, p)| match tape.param_grad(id) {
            Some(g) => g.data().to_vec(),
            // Never bound or unreached by the sweep: gradient is zero.
            None => vec![0.0; p.value.len()],
        })
        .collect();

    let probe = |set: &mut ParamSet, id: ParamId, i: usize, h: f64| {
        let orig = set.get(id).value.at(i);
        set.get_mut(id).value.set(i, orig + h);
        let up = loss_of(set);
        set.get_mut(id).value.set(i, orig - h);
        let down = loss_of(set);
        set.get_mut(id).value.set(i, orig);
        (up - down) / (2.0 * h)
    };

    let ids: Vec<_> = set.iter().map(|(id, _)| id).collect();
    let mut params = Vec::with_capacity(ids.len());
    let mut nonsmooth_skips = 0;
    for (k, &id) in ids.iter().enumerate() {
        let name = set.get(id).name().to_string();
        let len = set.get(id).value.len();
        let mut report = ParamReport {
            name,
            max_rel_err: 0.0,
            worst_index: 0,
            analytic: analytic[k].first().copied().unwrap_or(0.0),
            numeric: 0.0,
        };
        let mut recorded = false;
        for i in 0..len {
            let mut h = step;
            let mut numeric = probe(set, id, i, h);
            let mut err = rel_err(analytic[k][i], numeric);
            if err >= tol {
                // Either a genuine mismatch or a probe straddling a kink.
                // Halve the step: a kink artifact clears or keeps drifting;
                // a genuine mismatch yields estimates that agree with each
                // other and keep disagreeing with the analytic value.
                let mut settled = false;
                for _ in 0..MAX_REFINE {
                    let finer = probe(set, id, i, h * 0.5);
                    settled = rel_err(numeric, finer) < tol;
                    h *= 0.5;
                    numeric = finer;
                    err = rel_err(analytic[k][i], numeric);
                    if err < tol || settled {
                        break;
                    }
                }
                if err >= tol && !settled {
                    nonsmooth_skips += 1;
                    continue;
                }
            }
            if err > report.max_rel_err || !recorded {
                report.max_rel_err = err;
                report.worst_index = i;
                report.analytic = analytic[k][i];
                report.numeric = numeric;
                recorded = true;
            }
        }
        params.push(report);
    }

    Ok(GradCheckReport { params, step, tol, nonsmooth_skips })
}
