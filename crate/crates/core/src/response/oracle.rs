//! Fixed-step RK4 simulation, used only to cross-check closed forms.

use nalgebra::{DMatrix, DVector};

use crate::error::ResponseError;

/// Fewest steps accepted by [`oracle_rk4`].
pub const MIN_STEPS: usize = 100;

/// `ẋ = Ax + Bu`, `y = Cx`, `x(0) = x0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub x0: DVector<f64>,
}

impl StateSpace {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, x0: DVector<f64>) -> Result<Self, ResponseError> {
        let n = a.nrows();
        if a.ncols() != n || b.nrows() != n || c.ncols() != n || x0.len() != n {
            return Err(ResponseError::Dimension(format!(
                "state-space shapes A {}x{}, B {}x{}, C {}x{}, x0 {} are inconsistent",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols(),
                x0.len()
            )));
        }
        Ok(Self { a, b, c, x0 })
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }
}

/// The undamped oscillator `ẋ₁ = x₂, ẋ₂ = −λ²x₁ + u, y = −x₁` from rest.
pub fn section7_oscillator(lambda: f64) -> StateSpace {
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -lambda * lambda, 0.0]);
    let b = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
    let c = DMatrix::from_row_slice(1, 2, &[-1.0, 0.0]);
    StateSpace::new(a, b, c, DVector::zeros(2)).expect("fixed shapes")
}

/// Classical RK4 for `ẋ = f(t, x)` on `[0, tau]` with `steps` equal steps.
pub fn rk4_integrate<F>(f: F, x0: &[f64], tau: f64, steps: usize) -> Result<Vec<f64>, ResponseError>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    if !(tau.is_finite() && tau > 0.0) {
        return Err(ResponseError::Simulation(format!(
            "horizon must be positive, got {tau}"
        )));
    }
    if steps == 0 {
        return Err(ResponseError::Simulation("steps must be positive".into()));
    }
    let n = x0.len();
    let h = tau / steps as f64;
    let mut x = x0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    for step in 0..steps {
        let t = step as f64 * h;
        f(t, &x, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        f(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        f(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        f(t + h, &tmp, &mut k4);
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(ResponseError::Simulation(format!(
                "state component {i} became non-finite at t = {}",
                t + h
            )));
        }
    }
    Ok(x)
}

/// Simulates `sys` under input `u(t)` and returns `y(tau)`.
pub fn oracle_rk4<U>(sys: &StateSpace, u: U, tau: f64, steps: usize) -> Result<Vec<f64>, ResponseError>
where
    U: Fn(f64) -> Vec<f64>,
{
    if steps < MIN_STEPS {
        return Err(ResponseError::Simulation(format!(
            "at least {MIN_STEPS} steps required, got {steps}"
        )));
    }
    let m = sys.inputs();
    let rhs = |t: f64, x: &[f64], dx: &mut [f64]| {
        let uv = u(t);
        let xv = DVector::from_column_slice(x);
        let mut d = &sys.a * xv;
        for (j, uj) in uv.iter().take(m).enumerate() {
            d += sys.b.column(j) * *uj;
        }
        dx.copy_from_slice(d.as_slice());
    };
    let x = rk4_integrate(rhs, sys.x0.as_slice(), tau, steps)?;
    let y = &sys.c * DVector::from_vec(x);
    Ok(y.as_slice().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_state() {
        let x = rk4_integrate(|_, _, dx| dx[0] = 0.0, &[3.5], 1.0, 100).unwrap();
        assert_eq!(x, vec![3.5]);
    }

    #[test]
    fn scalar_exponential() {
        let x = rk4_integrate(|_, x, dx| dx[0] = x[0], &[1.0], 1.0, 10_000).unwrap();
        assert!((x[0] - std::f64::consts::E).abs() < 1e-10);
    }

    #[test]
    fn rejects_few_steps_and_blowup() {
        let sys = section7_oscillator(1.0);
        assert!(oracle_rk4(&sys, |_| vec![1.0], 1.0, 99).is_err());
        let r = rk4_integrate(|_, x, dx| dx[0] = x[0] * x[0], &[1e200], 1.0, 100);
        assert!(matches!(r, Err(ResponseError::Simulation(_))));
    }

    #[test]
    fn oscillator_step_response() {
        // unit step: x1(1) = (1 − cos λ)/λ², y = −x1
        let lam = 2.5f64;
        let y = oracle_rk4(&section7_oscillator(lam), |_| vec![1.0], 1.0, 1000).unwrap();
        let exact = -(1.0 - lam.cos()) / (lam * lam);
        assert!((y[0] - exact).abs() < 1e-11);
    }
}
