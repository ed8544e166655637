use crate::error::Result;
use crate::numcore::{Matrix, Tape, Var};

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Compares reverse-mode gradients of a scalar loss against central finite
/// differences.
///
/// `build` receives a fresh tape and one parameter leaf per entry of `params`
/// and must return the scalar loss node. It is called once for the analytic
/// pass and twice per coordinate for the numeric pass, each time on a new tape.
///
/// Returns the maximum over all coordinates of
/// `|analytic − numeric| / max(1, |numeric|)`.
pub fn finite_diff_check<F>(build: F, params: &[Matrix]) -> Result<f64>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    finite_diff_check_with_step(build, params, FD_STEP)
}

pub fn finite_diff_check_with_step<F>(build: F, params: &[Matrix], step: f64) -> Result<f64>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let evaluate = |values: &[Matrix]| -> Result<f64> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = values.iter().map(|m| tape.param(m.clone())).collect();
        let loss = build(&mut tape, &vars)?;
        tape.scalar(loss)
    };

    let mut tape = Tape::new();
    let vars: Vec<Var> = params.iter().map(|m| tape.param(m.clone())).collect();
    let loss = build(&mut tape, &vars)?;
    let grads = tape.backward(loss)?;

    let mut worst = 0.0_f64;
    let mut probe = params.to_vec();
    for (p, var) in vars.iter().enumerate() {
        let analytic = grads.wrt(&tape, *var);
        for k in 0..params[p].len() {
            let original = params[p].as_slice()[k];
            probe[p].as_mut_slice()[k] = original + step;
            let plus = evaluate(&probe)?;
            probe[p].as_mut_slice()[k] = original - step;
            let minus = evaluate(&probe)?;
            probe[p].as_mut_slice()[k] = original;

            let numeric = (plus - minus) / (2.0 * step);
            let err = (analytic.as_slice()[k] - numeric).abs() / numeric.abs().max(1.0);
            worst = worst.max(err);
        }
    }
    Ok(worst)
}
