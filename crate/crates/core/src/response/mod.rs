//! Band-limited inputs, modal system parameterisations and the exact
//! response map `G ↦ y(τ)`.
//!
//! A system is described directly by the coefficients of its impulse
//! response on the functions `ξ_ℓ(a, b, t) = t^{ℓ-1} e^{at} cos(bt)`
//! (`ℓ = 1..n`) and `t^{ℓ-n-1} e^{at} sin(bt)` (`ℓ = n+1..2n`). Since every
//! `ξ_ℓ · ω_j` integrates in closed form, the output at the horizon is an
//! exact finite sum.

pub mod oracle;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::ResponseError;
use crate::integrals::quadrature::integrate_quadrature;
use crate::integrals::{integrate_xi_times_basis, integrate_xi_times_basis_detailed, Trig};

pub use oracle::{oracle_rk4, rk4_integrate, section7_oscillator, StateSpace};

/// Tolerance on the redundant `e^{a} cos b`, `e^{a} sin b` eigen-table columns.
pub const EIGEN_TABLE_TOLERANCE: f64 = 1e-9;
/// Smallest admissible ratio of Gram singular values for a basis family.
pub const GRAM_CONDITION_FLOOR: f64 = 1e-10;

/// One input basis function `t^ell e^{alpha t} sin|cos(beta t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisFunction {
    pub ell: u32,
    pub alpha: f64,
    pub beta: f64,
    pub kind: Trig,
}

impl BasisFunction {
    pub fn new(ell: u32, alpha: f64, beta: f64, kind: Trig) -> Self {
        Self { ell, alpha, beta, kind }
    }

    /// The constant function 1.
    pub fn constant() -> Self {
        Self::new(0, 0.0, 0.0, Trig::Cos)
    }

    pub fn eval(&self, t: f64) -> f64 {
        t.powi(self.ell as i32) * (self.alpha * t).exp() * self.kind.eval(self.beta * t)
    }
}

/// Ordered, numerically independent input dictionary `ω_1..ω_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct BasisFamily {
    elements: Vec<BasisFunction>,
}

impl BasisFamily {
    pub fn new(elements: Vec<BasisFunction>) -> Result<Self, ResponseError> {
        if elements.is_empty() {
            return Err(ResponseError::Basis("family must contain at least one function".into()));
        }
        for (i, w) in elements.iter().enumerate() {
            if !(w.alpha.is_finite() && w.beta.is_finite()) {
                return Err(ResponseError::Basis(format!("element {i} has non-finite parameters")));
            }
            if w.kind == Trig::Sin && w.beta == 0.0 {
                return Err(ResponseError::Basis(format!(
                    "element {i} is sin(0 t), which vanishes identically"
                )));
            }
            for (j, v) in elements.iter().enumerate().take(i) {
                if v == w {
                    return Err(ResponseError::Basis(format!("elements {j} and {i} coincide")));
                }
            }
        }
        let family = Self { elements };
        let gram = family.gram_matrix()?;
        let eig = SymmetricEigen::new(gram);
        let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(min > GRAM_CONDITION_FLOOR * max) {
            return Err(ResponseError::Basis(format!(
                "family is numerically dependent on [0, 1] (Gram eigenvalues {min:e} .. {max:e})"
            )));
        }
        Ok(family)
    }

    /// `{sin(jπt)}_{j=1..k}`.
    pub fn sine_harmonics(k: usize) -> Self {
        let elements = (1..=k)
            .map(|j| BasisFunction::new(0, 0.0, j as f64 * std::f64::consts::PI, Trig::Sin))
            .collect();
        Self::new(elements).expect("sine harmonics are orthogonal")
    }

    pub fn elements(&self) -> &[BasisFunction] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn ell_max(&self) -> u32 {
        self.elements.iter().map(|w| w.ell).max().unwrap_or(0)
    }

    /// L² inner products on [0, 1], each computed in closed form.
    pub fn gram_matrix(&self) -> Result<DMatrix<f64>, ResponseError> {
        let k = self.elements.len();
        let mut g = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let wi = &self.elements[i];
                let v = integrate_xi_times_basis(wi.ell, wi.alpha, wi.beta, wi.kind, &self.elements[j], 1.0)?;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(g)
    }
}

impl<'de> Deserialize<'de> for BasisFamily {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let elements = Vec::<BasisFunction>::deserialize(d)?;
        BasisFamily::new(elements).map_err(serde::de::Error::custom)
    }
}

/// Control coefficients `G` (m rows × k columns); the input is `u = Gω`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ControlMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, ResponseError> {
        if data.len() != rows * cols {
            return Err(ResponseError::Dimension(format!(
                "control matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(ResponseError::Params("control matrix has non-finite entries".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ResponseError> {
        let m = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) {
            return Err(ResponseError::Dimension("ragged control matrix".into()));
        }
        Self::new(m, k, rows.concat())
    }

    /// Single-input control `g_1..g_k`.
    pub fn row(g: &[f64]) -> Result<Self, ResponseError> {
        Self::new(1, g.len(), g.to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, ResponseError> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(ResponseError::Dimension("control matrices differ in shape".into()));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    /// Input vector `u(t) = Gω(t)`.
    pub fn input_at(&self, family: &BasisFamily, t: f64) -> Vec<f64> {
        let w: Vec<f64> = family.elements().iter().map(|f| f.eval(t)).collect();
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * w[j]).sum())
            .collect()
    }
}

/// The modal parameter vector `λ = (A, X, h)`: coefficients `α_{irℓκ}`,
/// the eigen table rows `(a_r, b_r, e^{a_r} cos b_r, e^{a_r} sin b_r)` and the offset `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct FullSystemParams {
    m: usize,
    n: usize,
    p: usize,
    /// Flattened `[i][r][ℓ][κ]` with `ℓ` running over `2n` slots.
    coeffs: Vec<f64>,
    eigen_table: Vec<[f64; 4]>,
    offset: Vec<f64>,
}

impl FullSystemParams {
    /// `coeffs[i][r][ℓ][κ]` with shape `m × n × 2n × p`.
    pub fn new(
        coeffs: Vec<Vec<Vec<Vec<f64>>>>,
        eigen_table: Vec<[f64; 4]>,
        offset: Vec<f64>,
    ) -> Result<Self, ResponseError> {
        let m = coeffs.len();
        let n = eigen_table.len();
        let p = offset.len();
        if m == 0 || n == 0 || p == 0 {
            return Err(ResponseError::Dimension("m, n and p must all be at least 1".into()));
        }
        let mut flat = Vec::with_capacity(m * n * 2 * n * p);
        for (i, by_r) in coeffs.iter().enumerate() {
            if by_r.len() != n {
                return Err(ResponseError::Dimension(format!(
                    "coeffs[{i}] has {} rows, expected n = {n}",
                    by_r.len()
                )));
            }
            for (r, by_l) in by_r.iter().enumerate() {
                if by_l.len() != 2 * n {
                    return Err(ResponseError::Dimension(format!(
                        "coeffs[{i}][{r}] has {} entries, expected 2n = {}",
                        by_l.len(),
                        2 * n
                    )));
                }
                for (l, by_k) in by_l.iter().enumerate() {
                    if by_k.len() != p {
                        return Err(ResponseError::Dimension(format!(
                            "coeffs[{i}][{r}][{l}] has {} entries, expected p = {p}",
                            by_k.len()
                        )));
                    }
                    flat.extend_from_slice(by_k);
                }
            }
        }
        Self::from_flat(m, n, p, flat, eigen_table, offset)
    }

    pub fn from_flat(
        m: usize,
        n: usize,
        p: usize,
        coeffs: Vec<f64>,
        eigen_table: Vec<[f64; 4]>,
        offset: Vec<f64>,
    ) -> Result<Self, ResponseError> {
        if coeffs.len() != m * n * 2 * n * p || eigen_table.len() != n || offset.len() != p {
            return Err(ResponseError::Dimension(format!(
                "inconsistent shapes for m={m}, n={n}, p={p}"
            )));
        }
        if coeffs.iter().chain(&offset).any(|x| !x.is_finite()) {
            return Err(ResponseError::Params("non-finite coefficient or offset".into()));
        }
        for (r, row) in eigen_table.iter().enumerate() {
            if row.iter().any(|x| !x.is_finite()) {
                return Err(ResponseError::Params(format!("eigen_table[{r}] is not finite")));
            }
            let growth = row[0].exp();
            let (s, c) = row[1].sin_cos();
            if (row[2] - growth * c).abs() > EIGEN_TABLE_TOLERANCE
                || (row[3] - growth * s).abs() > EIGEN_TABLE_TOLERANCE
            {
                return Err(ResponseError::Params(format!(
                    "eigen_table[{r}] is inconsistent: expected ({}, {}) in the last two columns",
                    growth * c,
                    growth * s
                )));
            }
        }
        Ok(Self {
            m,
            n,
            p,
            coeffs,
            eigen_table,
            offset,
        })
    }

    /// Builds the eigen table from `(a_r, b_r)` pairs.
    pub fn from_eigenvalues(
        m: usize,
        p: usize,
        coeffs: Vec<f64>,
        eigenvalues: &[(f64, f64)],
        offset: Vec<f64>,
    ) -> Result<Self, ResponseError> {
        let table = eigenvalues.iter().map(|&(a, b)| eigen_row(a, b)).collect();
        Self::from_flat(m, eigenvalues.len(), p, coeffs, table, offset)
    }

    /// All-zero coefficients with the given offset.
    pub fn zero(m: usize, n: usize, offset: Vec<f64>) -> Self {
        let p = offset.len();
        let table = vec![eigen_row(0.0, 0.0); n];
        Self::from_flat(m, n, p, vec![0.0; m * n * 2 * n * p], table, offset).expect("zero system is well-formed")
    }

    pub fn m(&self) -> usize {
        self.m
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn p(&self) -> usize {
        self.p
    }
    pub fn eigen_table(&self) -> &[[f64; 4]] {
        &self.eigen_table
    }
    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    fn index(&self, i: usize, r: usize, l: usize, kappa: usize) -> usize {
        ((i * self.n + r) * 2 * self.n + l) * self.p + kappa
    }

    /// `α_{irℓκ}` with zero-based indices.
    pub fn coeff(&self, i: usize, r: usize, l: usize, kappa: usize) -> f64 {
        self.coeffs[self.index(i, r, l, kappa)]
    }

    pub fn coeffs_nested(&self) -> Vec<Vec<Vec<Vec<f64>>>> {
        (0..self.m)
            .map(|i| {
                (0..self.n)
                    .map(|r| {
                        (0..2 * self.n)
                            .map(|l| (0..self.p).map(|k| self.coeff(i, r, l, k)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// Every coefficient and offset multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|x| *x *= c);
        out.offset.iter_mut().for_each(|x| *x *= c);
        out
    }

    fn row_is_active(&self, r: usize) -> bool {
        (0..self.m).any(|i| (0..2 * self.n).any(|l| (0..self.p).any(|k| self.coeff(i, r, l, k) != 0.0)))
    }
}

/// `(a, b, e^a cos b, e^a sin b)`.
pub fn eigen_row(a: f64, b: f64) -> [f64; 4] {
    let g = a.exp();
    let (s, c) = b.sin_cos();
    [a, b, g * c, g * s]
}

/// The trigonometric kind and power of `ξ_ℓ` (zero-based `ℓ`, `2n` slots).
pub fn xi_shape(l: usize, n: usize) -> (u32, Trig) {
    if l < n {
        (l as u32, Trig::Cos)
    } else {
        ((l - n) as u32, Trig::Sin)
    }
}

/// How the `n` eigen-parameter slots split into real eigenvalues and complex pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenSlot {
    /// Consumes one parameter `a`; contributes `e^{at}`.
    Real,
    /// Consumes `(a, b)`; contributes `e^{at}cos(bt)` and `e^{at}sin(bt)`.
    ComplexPair,
}

impl EigenSlot {
    pub fn width(self) -> usize {
        match self {
            EigenSlot::Real => 1,
            EigenSlot::ComplexPair => 2,
        }
    }
}

/// Declared Jordan structure of a compact parameterisation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JordanTag(pub Vec<EigenSlot>);

impl JordanTag {
    pub fn all_real(n: usize) -> Self {
        Self(vec![EigenSlot::Real; n])
    }

    pub fn dimension(&self) -> usize {
        self.0.iter().map(|s| s.width()).sum()
    }

    /// One `(a, b, trig)` triple per `ξ` function, in slot order.
    pub fn modes(&self, eigen_params: &[f64]) -> Vec<(f64, f64, Trig)> {
        let mut out = Vec::with_capacity(eigen_params.len());
        let mut pos = 0;
        for slot in &self.0 {
            match slot {
                EigenSlot::Real => {
                    out.push((eigen_params[pos], 0.0, Trig::Cos));
                }
                EigenSlot::ComplexPair => {
                    let (a, b) = (eigen_params[pos], eigen_params[pos + 1]);
                    out.push((a, b, Trig::Cos));
                    out.push((a, b, Trig::Sin));
                }
            }
            pos += slot.width();
        }
        out
    }
}

/// The `n(m+1)` parameters of a fixed-Jordan-structure system: coefficients
/// `α_{iℓ}` (m × n) and `n` eigen parameters, all bounded by 1 in magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactSystemParams {
    m: usize,
    coeffs: Vec<f64>,
    eigen_params: Vec<f64>,
    tag: JordanTag,
}

impl CompactSystemParams {
    pub fn new(m: usize, coeffs: Vec<f64>, eigen_params: Vec<f64>, tag: JordanTag) -> Result<Self, ResponseError> {
        let n = eigen_params.len();
        if n == 0 || m == 0 {
            return Err(ResponseError::Dimension("m and n must be at least 1".into()));
        }
        if tag.dimension() != n {
            return Err(ResponseError::Dimension(format!(
                "jordan tag covers {} slots but {n} eigen parameters were given",
                tag.dimension()
            )));
        }
        if coeffs.len() != m * n {
            return Err(ResponseError::Dimension(format!(
                "compact coefficients need m*n = {} entries, got {}",
                m * n,
                coeffs.len()
            )));
        }
        if let Some(x) = coeffs.iter().chain(&eigen_params).find(|x| !(x.abs() < 1.0)) {
            return Err(ResponseError::Params(format!(
                "compact parameters must satisfy |λ_i| < 1, found {x}"
            )));
        }
        Ok(Self {
            m,
            coeffs,
            eigen_params,
            tag,
        })
    }

    /// Reads the flat vector `(α_11..α_mn, eigen params)` of length `n(m+1)`.
    pub fn from_vector(m: usize, lambda: &[f64], tag: JordanTag) -> Result<Self, ResponseError> {
        let n = tag.dimension();
        if lambda.len() != n * (m + 1) {
            return Err(ResponseError::Dimension(format!(
                "expected n(m+1) = {} parameters, got {}",
                n * (m + 1),
                lambda.len()
            )));
        }
        Self::new(m, lambda[..m * n].to_vec(), lambda[m * n..].to_vec(), tag)
    }

    pub fn to_vector(&self) -> Vec<f64> {
        self.coeffs.iter().chain(&self.eigen_params).copied().collect()
    }

    pub fn m(&self) -> usize {
        self.m
    }
    pub fn n(&self) -> usize {
        self.eigen_params.len()
    }
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
    pub fn eigen_params(&self) -> &[f64] {
        &self.eigen_params
    }
    pub fn tag(&self) -> &JordanTag {
        &self.tag
    }

    /// Equivalent full parameterisation with `p = 1` and zero offset: mode `ℓ`
    /// occupies eigen-table row `ℓ` with its power-0 cosine or sine slot.
    pub fn to_full(&self) -> FullSystemParams {
        let n = self.n();
        let modes = self.tag.modes(&self.eigen_params);
        let mut coeffs = vec![0.0; self.m * n * 2 * n];
        for i in 0..self.m {
            for (r, &(_, _, trig)) in modes.iter().enumerate() {
                let slot = match trig {
                    Trig::Cos => 0,
                    Trig::Sin => n,
                };
                coeffs[(i * n + r) * 2 * n + slot] = self.coeffs[i * n + r];
            }
        }
        let eig: Vec<(f64, f64)> = modes.iter().map(|&(a, b, _)| (a, b)).collect();
        FullSystemParams::from_eigenvalues(self.m, 1, coeffs, &eig, vec![0.0])
            .expect("compact parameters are bounded, hence finite")
    }
}

/// Either parameterisation of a system.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemParams {
    Full(FullSystemParams),
    Compact(CompactSystemParams),
}

impl SystemParams {
    pub fn to_full(&self) -> FullSystemParams {
        match self {
            SystemParams::Full(f) => f.clone(),
            SystemParams::Compact(c) => c.to_full(),
        }
    }
}

impl From<FullSystemParams> for SystemParams {
    fn from(p: FullSystemParams) -> Self {
        SystemParams::Full(p)
    }
}

impl From<CompactSystemParams> for SystemParams {
    fn from(p: CompactSystemParams) -> Self {
        SystemParams::Compact(p)
    }
}

/// A pole condition `(a_r + α_j)² + (b_r ∓ β_j)² = 0` active in an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActivePole {
    /// Zero-based eigen-table row.
    pub row: usize,
    /// Zero-based basis index.
    pub basis: usize,
    /// `true` for `(b + β)`, `false` for `(b − β)`.
    pub plus: bool,
}

/// Response vector plus the pole conditions that selected the evaluated branch.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseDetail {
    pub y: Vec<f64>,
    pub active_poles: Vec<ActivePole>,
}

fn check_tau(tau: f64) -> Result<(), ResponseError> {
    if tau.is_finite() && tau > 0.0 {
        Ok(())
    } else {
        Err(ResponseError::Dimension(format!(
            "horizon tau must be positive, got {tau}"
        )))
    }
}

/// `T[r][ℓ][j] = ∫_0^τ ξ_ℓ(a_r, b_r, t) ω_j(t) dt`, plus active poles of live rows.
fn xi_basis_table(
    params: &FullSystemParams,
    family: &BasisFamily,
    tau: f64,
) -> Result<(Vec<f64>, Vec<ActivePole>), ResponseError> {
    let n = params.n;
    let k = family.len();
    let mut table = vec![0.0; n * 2 * n * k];
    let mut poles = Vec::new();
    for r in 0..n {
        let [a, b, _, _] = params.eigen_table[r];
        let live = params.row_is_active(r);
        for l in 0..2 * n {
            let (power, trig) = xi_shape(l, n);
            for (j, w) in family.elements().iter().enumerate() {
                let res = integrate_xi_times_basis_detailed(power, a, b, trig, w, tau)?;
                table[(r * 2 * n + l) * k + j] = res.value;
                if live {
                    for (_, mono, out) in &res.parts {
                        if out.branch == crate::integrals::Branch::DegenerateDenominator {
                            let plus =
                                (mono.freq - (b + w.beta)).abs() <= (mono.freq - (b - w.beta)).abs() && w.beta != 0.0;
                            poles.push(ActivePole { row: r, basis: j, plus });
                        }
                    }
                }
            }
        }
    }
    poles.sort();
    poles.dedup();
    Ok((table, poles))
}

/// `y_κ = h_κ + Σ_{i,r,ℓ,j} α_{irℓκ} g_{ij} ∫_0^τ ξ_ℓ(a_r, b_r, t) ω_j(t) dt`.
pub fn response_full(
    params: &FullSystemParams,
    g: &ControlMatrix,
    family: &BasisFamily,
    tau: f64,
) -> Result<Vec<f64>, ResponseError> {
    response_full_detailed(params, g, family, tau).map(|d| d.y)
}

pub fn response_full_detailed(
    params: &FullSystemParams,
    g: &ControlMatrix,
    family: &BasisFamily,
    tau: f64,
) -> Result<ResponseDetail, ResponseError> {
    check_tau(tau)?;
    if g.rows() != params.m || g.cols() != family.len() {
        return Err(ResponseError::Dimension(format!(
            "control matrix is {}x{}, system expects {}x{}",
            g.rows(),
            g.cols(),
            params.m,
            family.len()
        )));
    }
    let (table, active_poles) = xi_basis_table(params, family, tau)?;
    let n = params.n;
    let k = family.len();
    let mut y = params.offset.clone();
    for (kappa, out) in y.iter_mut().enumerate() {
        for i in 0..params.m {
            for r in 0..n {
                for l in 0..2 * n {
                    let alpha = params.coeff(i, r, l, kappa);
                    if alpha == 0.0 {
                        continue;
                    }
                    let row = &table[(r * 2 * n + l) * k..(r * 2 * n + l + 1) * k];
                    let inner: f64 = (0..k).map(|j| g.get(i, j) * row[j]).sum();
                    *out += alpha * inner;
                }
            }
        }
    }
    Ok(ResponseDetail { y, active_poles })
}

/// [`response_full`] computed by adaptive quadrature of the whole integrand, as an oracle.
pub fn response_quadrature(
    params: &FullSystemParams,
    g: &ControlMatrix,
    family: &BasisFamily,
    tau: f64,
    rel_tol: f64,
) -> Result<Vec<f64>, ResponseError> {
    check_tau(tau)?;
    if g.rows() != params.m || g.cols() != family.len() {
        return Err(ResponseError::Dimension(format!(
            "control matrix is {}x{}, system expects {}x{}",
            g.rows(),
            g.cols(),
            params.m,
            family.len()
        )));
    }
    let n = params.n;
    (0..params.p)
        .map(|kappa| {
            let integrand = |t: f64| {
                let u = g.input_at(family, t);
                let mut acc = 0.0;
                for r in 0..n {
                    let [a, b, _, _] = params.eigen_table[r];
                    for l in 0..2 * n {
                        let (power, trig) = xi_shape(l, n);
                        let xi = t.powi(power as i32) * (a * t).exp() * trig.eval(b * t);
                        for (i, ui) in u.iter().enumerate() {
                            acc += params.coeff(i, r, l, kappa) * xi * ui;
                        }
                    }
                }
                acc
            };
            Ok(params.offset[kappa] + integrate_quadrature(integrand, tau, rel_tol)?.value)
        })
        .collect()
}

/// Linear-in-`G` coefficients `λ_{ij}(τ)` of a scalar-output system:
/// `y(τ) = h + Σ_{i,j} g_{ij} λ_{ij}(τ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaTable {
    pub m: usize,
    pub k: usize,
    pub values: Vec<f64>,
    pub offset: f64,
}

impl LambdaTable {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.k + j]
    }

    /// `h + Σ g_{ij} λ_{ij}`.
    pub fn evaluate(&self, g: &[f64]) -> f64 {
        self.offset + self.values.iter().zip(g).map(|(l, x)| l * x).sum::<f64>()
    }
}

pub fn precompute_lambda(params: &SystemParams, family: &BasisFamily, tau: f64) -> Result<LambdaTable, ResponseError> {
    check_tau(tau)?;
    let full = params.to_full();
    if full.p != 1 {
        return Err(ResponseError::Dimension(format!(
            "linear-in-G form needs a scalar output, system has p = {}",
            full.p
        )));
    }
    let n = full.n;
    let k = family.len();
    let mut values = vec![0.0; full.m * k];
    for r in 0..n {
        let [a, b, _, _] = full.eigen_table[r];
        for l in 0..2 * n {
            let live: Vec<usize> = (0..full.m).filter(|&i| full.coeff(i, r, l, 0) != 0.0).collect();
            if live.is_empty() {
                continue;
            }
            let (power, trig) = xi_shape(l, n);
            for (j, w) in family.elements().iter().enumerate() {
                let v = integrate_xi_times_basis(power, a, b, trig, w, tau)?;
                for &i in &live {
                    values[i * k + j] += full.coeff(i, r, l, 0) * v;
                }
            }
        }
    }
    Ok(LambdaTable {
        m: full.m,
        k,
        values,
        offset: full.offset[0],
    })
}

/// `(λ_1(τ), …, λ_k(τ))` for a single-input, single-output system.
pub fn precompute_lambda_j(params: &SystemParams, family: &BasisFamily, tau: f64) -> Result<Vec<f64>, ResponseError> {
    let table = precompute_lambda(params, family, tau)?;
    if table.m != 1 {
        return Err(ResponseError::Dimension(format!(
            "λ_j vector needs a scalar input, system has m = {}",
            table.m
        )));
    }
    Ok(table.values)
}

/// Response of a compact system at `G`.
pub fn response_compact(
    params: &CompactSystemParams,
    g: &ControlMatrix,
    family: &BasisFamily,
    tau: f64,
) -> Result<f64, ResponseError> {
    response_full(&params.to_full(), g, family, tau).map(|y| y[0])
}

/// Componentwise `sign z = 1` if `z > 0`, else `0`.
pub fn sign_observe(y: &[f64]) -> Vec<bool> {
    y.iter().map(|&v| v > 0.0).collect()
}

/// `(z1 − z2)² / (1 + (z1 − z2)²)`.
pub fn loss_eval(z1: f64, z2: f64) -> f64 {
    let d2 = (z1 - z2) * (z1 - z2);
    d2 / (1.0 + d2)
}
