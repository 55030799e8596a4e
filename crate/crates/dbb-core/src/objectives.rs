//! Strongly convex quadratic objectives: per-agent quadratics, least squares,
//! and the aggregate network objective with its closed-form optimum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::{self, SymMatrix};

const MU_FLOOR: f64 = 1e-12;

/// A differentiable objective with known curvature bounds.
pub trait Objective {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> Result<f64>;
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;
    /// `(mu, L)`: strong convexity modulus and gradient Lipschitz constant.
    fn curvature(&self) -> (f64, f64);
    /// Closed-form minimizer.
    fn minimizer(&self) -> Result<Vec<f64>>;
}

/// `f(x) = 0.5 xᵀ A x + bᵀ x` with Hessian `H = (A + Aᵀ)/2`.
///
/// `A` is stored as given (possibly nonsymmetric); the gradient is
/// `0.5 (A + Aᵀ) x + b = H x + b`.
#[derive(Debug, Clone)]
pub struct QuadraticAgentObjective {
    a: Vec<f64>, // p x p row-major, as provided
    b: Vec<f64>,
    h: SymMatrix,
    mu: f64,
    l: f64,
}

impl QuadraticAgentObjective {
    pub fn new(p: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != p * p {
            return Err(Error::DimensionMismatch {
                expected: p * p,
                got: a.len(),
            });
        }
        if b.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: b.len(),
            });
        }
        let h = SymMatrix::from_rows(p, &a)?;
        let (mu, l) = h.eig_bounds()?;
        if mu <= MU_FLOOR {
            return Err(Error::NotStronglyConvex { mu });
        }
        Ok(Self { a, b, h, mu, l })
    }

    pub fn from_hessian(h: SymMatrix, b: Vec<f64>) -> Result<Self> {
        let p = h.dim();
        Self::new(p, h.rows().to_vec(), b)
    }

    pub fn hessian(&self) -> &SymMatrix {
        &self.h
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }
}

impl Objective for QuadraticAgentObjective {
    fn dim(&self) -> usize {
        self.h.dim()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let p = self.dim();
        check_dim(p, x)?;
        let ax = numerics::gemv(p, p, &self.a, x);
        Ok(0.5 * numerics::dot(x, &ax) + numerics::dot(&self.b, x))
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x)?;
        let mut g = self.h.matvec(x)?;
        for (gi, bi) in g.iter_mut().zip(&self.b) {
            *gi += bi;
        }
        Ok(g)
    }

    fn curvature(&self) -> (f64, f64) {
        (self.mu, self.l)
    }

    fn minimizer(&self) -> Result<Vec<f64>> {
        let neg_b: Vec<f64> = self.b.iter().map(|v| -v).collect();
        self.h.spd_solve(&neg_b)
    }
}

/// `f(x) = ||A x - b||²` with Hessian `2 AᵀA`.
#[derive(Debug, Clone)]
pub struct LeastSquaresObjective {
    m: usize,
    p: usize,
    a: Vec<f64>, // m x p row-major
    b: Vec<f64>,
    h: SymMatrix, // 2 AᵀA
    mu: f64,
    l: f64,
}

impl LeastSquaresObjective {
    pub fn new(m: usize, p: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != m * p {
            return Err(Error::DimensionMismatch {
                expected: m * p,
                got: a.len(),
            });
        }
        if b.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: b.len(),
            });
        }
        let mut ata = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                let mut acc = 0.0;
                for r in 0..m {
                    acc += a[r * p + i] * a[r * p + j];
                }
                ata[i * p + j] = 2.0 * acc;
            }
        }
        let h = SymMatrix::from_rows(p, &ata)?;
        let (mu, l) = h.eig_bounds()?;
        if mu <= MU_FLOOR {
            return Err(Error::NotStronglyConvex { mu });
        }
        Ok(Self { m, p, a, b, h, mu, l })
    }
}

impl Objective for LeastSquaresObjective {
    fn dim(&self) -> usize {
        self.p
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.p, x)?;
        let ax = numerics::gemv(self.m, self.p, &self.a, x);
        let r = numerics::sub(&ax, &self.b);
        Ok(numerics::dot(&r, &r))
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.p, x)?;
        let ax = numerics::gemv(self.m, self.p, &self.a, x);
        let r = numerics::sub(&ax, &self.b);
        Ok(numerics::gemv_t(self.m, self.p, &self.a, &r)
            .into_iter()
            .map(|v| 2.0 * v)
            .collect())
    }

    fn curvature(&self) -> (f64, f64) {
        (self.mu, self.l)
    }

    fn minimizer(&self) -> Result<Vec<f64>> {
        // 2 AᵀA x* = 2 Aᵀ b
        let rhs: Vec<f64> = numerics::gemv_t(self.m, self.p, &self.a, &self.b)
            .into_iter()
            .map(|v| 2.0 * v)
            .collect();
        self.h.spd_solve(&rhs)
    }
}

/// Sum of per-agent quadratics, `f(x) = Σ_i f_i(x)`.
#[derive(Debug, Clone)]
pub struct NetworkObjective {
    agents: Vec<QuadraticAgentObjective>,
    h_sum: SymMatrix,
    mu: f64,
    l: f64,
    mu_bar: f64,
    l_bar: f64,
}

impl NetworkObjective {
    pub fn new(agents: Vec<QuadraticAgentObjective>) -> Result<Self> {
        let first = agents
            .first()
            .ok_or_else(|| Error::Invalid("network objective needs at least one agent".into()))?;
        let p = first.dim();
        let mut h_sum = SymMatrix::zeros(p);
        let mut mu_bar = 0.0;
        let mut l_bar = 0.0;
        for agent in &agents {
            if agent.dim() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: agent.dim(),
                });
            }
            h_sum = h_sum.add(agent.hessian())?;
            let (mu_i, l_i) = agent.curvature();
            mu_bar += mu_i;
            l_bar += l_i;
        }
        let n = agents.len() as f64;
        let (mu, l) = h_sum.eig_bounds()?;
        if mu <= MU_FLOOR {
            return Err(Error::NotStronglyConvex { mu });
        }
        Ok(Self {
            agents,
            h_sum,
            mu,
            l,
            mu_bar: mu_bar / n,
            l_bar: l_bar / n,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> &[QuadraticAgentObjective] {
        &self.agents
    }

    pub fn agent(&self, i: usize) -> &QuadraticAgentObjective {
        &self.agents[i]
    }

    /// Averages of the per-agent curvature constants.
    pub fn curvature_averages(&self) -> (f64, f64) {
        (self.mu_bar, self.l_bar)
    }

    pub fn mu_min(&self) -> f64 {
        self.agents
            .iter()
            .map(|a| a.curvature().0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Solves the aggregated first-order condition `(Σ H_i) x* = -Σ b_i`.
    pub fn optimal_point(&self) -> Result<Vec<f64>> {
        let p = self.agents[0].dim();
        let mut rhs = vec![0.0; p];
        for agent in &self.agents {
            for (r, b) in rhs.iter_mut().zip(agent.b()) {
                *r -= b;
            }
        }
        self.h_sum.spd_solve(&rhs)
    }
}

impl Objective for NetworkObjective {
    fn dim(&self) -> usize {
        self.agents[0].dim()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.agents.iter().map(|a| a.value(x)).sum()
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; self.dim()];
        for agent in &self.agents {
            let gi = agent.gradient(x)?;
            for (a, b) in g.iter_mut().zip(&gi) {
                *a += b;
            }
        }
        Ok(g)
    }

    fn curvature(&self) -> (f64, f64) {
        (self.mu, self.l)
    }

    fn minimizer(&self) -> Result<Vec<f64>> {
        self.optimal_point()
    }
}

fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: x.len(),
        });
    }
    Ok(())
}

/// Symmetric matrix with a prescribed spectrum, built as `Q D Qᵀ` by applying
/// seeded Givens rotations to `diag(d)`. Similarity transforms preserve the
/// spectrum, so curvature bounds are controlled exactly up to rounding.
pub fn random_spd_with_spectrum(p: usize, eigs: &[f64], rng: &mut ChaCha8Rng) -> Result<SymMatrix> {
    debug_assert_eq!(eigs.len(), p);
    let mut a = vec![0.0; p * p];
    for i in 0..p {
        a[i * p + i] = eigs[i];
    }
    for _ in 0..3 {
        for i in 0..p {
            for j in i + 1..p {
                let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                let (s, c) = theta.sin_cos();
                for r in 0..p {
                    let ari = a[r * p + i];
                    let arj = a[r * p + j];
                    a[r * p + i] = c * ari - s * arj;
                    a[r * p + j] = s * ari + c * arj;
                }
                for r in 0..p {
                    let air = a[i * p + r];
                    let ajr = a[j * p + r];
                    a[i * p + r] = c * air - s * ajr;
                    a[j * p + r] = s * air + c * ajr;
                }
            }
        }
    }
    SymMatrix::from_rows(p, &a)
}

/// Network of `n` agents with Hessian eigenvalues drawn uniformly in
/// `[1, condition_cap]` and `b_i` entries uniform in `[-1, 1]`, all derived
/// deterministically from the seed.
pub fn random_network_objective(
    n: usize,
    p: usize,
    condition_cap: f64,
    seed: u64,
) -> Result<NetworkObjective> {
    if n < 1 || p < 1 {
        return Err(Error::Invalid("need n >= 1 and p >= 1".into()));
    }
    if condition_cap < 1.0 {
        return Err(Error::Invalid(format!(
            "condition_cap must be >= 1, got {condition_cap}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agents = Vec::with_capacity(n);
    for _ in 0..n {
        let eigs: Vec<f64> = (0..p).map(|_| rng.gen_range(1.0..=condition_cap)).collect();
        let h = random_spd_with_spectrum(p, &eigs, &mut rng)?;
        let b: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        agents.push(QuadraticAgentObjective::from_hessian(h, b)?);
    }
    NetworkObjective::new(agents)
}

/// Seeded least-squares instance with a symmetric positive definite `A`
/// whose spectrum is drawn uniformly in `[lo, hi]`.
pub fn random_least_squares(p: usize, lo: f64, hi: f64, seed: u64) -> Result<LeastSquaresObjective> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eigs: Vec<f64> = (0..p).map(|_| rng.gen_range(lo..=hi)).collect();
    let a = random_spd_with_spectrum(p, &eigs, &mut rng)?;
    let b: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    LeastSquaresObjective::new(p, p, a.rows().to_vec(), b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::norm;

    #[test]
    fn quadratic_gradient_identity() {
        let obj =
            QuadraticAgentObjective::new(2, vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(obj.gradient(&[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn quadratic_gradient_at_origin_is_b() {
        let obj =
            QuadraticAgentObjective::new(2, vec![1.0, 0.0, 0.0, 1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(obj.gradient(&[0.0, 0.0]).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn least_squares_gradient_hand() {
        // A = I, b = 0: grad = 2x
        let obj =
            LeastSquaresObjective::new(2, 2, vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(obj.gradient(&[1.0, 1.0]).unwrap(), vec![2.0, 2.0]);
    }

    #[test]
    fn curvature_diagonal() {
        let obj =
            QuadraticAgentObjective::new(2, vec![2.0, 0.0, 0.0, 6.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(obj.curvature(), (2.0, 6.0));
    }

    #[test]
    fn curvature_identity() {
        let obj =
            QuadraticAgentObjective::new(2, vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let (mu, l) = obj.curvature();
        assert!((mu - 1.0).abs() < 1e-12 && (l - 1.0).abs() < 1e-12);
    }

    #[test]
    fn curvature_least_squares_hand() {
        // A = diag(1, 2): H = 2 AᵀA = diag(2, 8)
        let obj =
            LeastSquaresObjective::new(2, 2, vec![1.0, 0.0, 0.0, 2.0], vec![0.3, -0.7]).unwrap();
        let (mu, l) = obj.curvature();
        assert!((mu - 2.0).abs() < 1e-10);
        assert!((l - 8.0).abs() < 1e-10);
    }

    #[test]
    fn optimal_point_identical_agents() {
        let c = vec![0.5, -1.5];
        let agents: Vec<_> = (0..4)
            .map(|_| {
                QuadraticAgentObjective::new(2, vec![1.0, 0.0, 0.0, 1.0], c.clone()).unwrap()
            })
            .collect();
        let net = NetworkObjective::new(agents).unwrap();
        let x_star = net.optimal_point().unwrap();
        assert!((x_star[0] + 0.5).abs() < 1e-12);
        assert!((x_star[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn optimal_point_single_agent_hand() {
        // A = diag(2,4), b = [2,4]: solve 0.5(A+Aᵀ)x = -b -> x = [-1,-1]
        let obj =
            QuadraticAgentObjective::new(2, vec![2.0, 0.0, 0.0, 4.0], vec![2.0, 4.0]).unwrap();
        let net = NetworkObjective::new(vec![obj]).unwrap();
        let x_star = net.optimal_point().unwrap();
        assert!((x_star[0] + 1.0).abs() < 1e-12);
        assert!((x_star[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn optimal_point_zero_b_is_origin() {
        let net = random_network_objective(3, 4, 5.0, 9).unwrap();
        let agents: Vec<_> = net
            .agents()
            .iter()
            .map(|a| {
                QuadraticAgentObjective::from_hessian(a.hessian().clone(), vec![0.0; 4]).unwrap()
            })
            .collect();
        let net0 = NetworkObjective::new(agents).unwrap();
        assert!(norm(&net0.optimal_point().unwrap()) < 1e-12);
    }

    #[test]
    fn optimal_point_gradient_vanishes() {
        let net = random_network_objective(5, 6, 20.0, 123).unwrap();
        let x_star = net.optimal_point().unwrap();
        let g = net.gradient(&x_star).unwrap();
        let b_sum: f64 = {
            let mut s = vec![0.0; 6];
            for a in net.agents() {
                for (si, bi) in s.iter_mut().zip(a.b()) {
                    *si += bi;
                }
            }
            norm(&s)
        };
        assert!(norm(&g) <= 1e-10 * (1.0 + b_sum));
    }

    #[test]
    fn random_network_condition_cap_one_forces_unit_curvature() {
        let net = random_network_objective(1, 1, 1.0, 77).unwrap();
        let (mu, l) = net.agent(0).curvature();
        assert!((mu - 1.0).abs() < 1e-12 && (l - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_network_deterministic() {
        let a = random_network_objective(4, 3, 8.0, 55).unwrap();
        let b = random_network_objective(4, 3, 8.0, 55).unwrap();
        for (x, y) in a.agents().iter().zip(b.agents()) {
            assert_eq!(x.hessian(), y.hessian());
            assert_eq!(x.b(), y.b());
        }
    }

    #[test]
    fn random_network_experiment_scale() {
        let net = random_network_objective(100, 10, 10.0, 1).unwrap();
        assert_eq!(net.n_agents(), 100);
        assert_eq!(net.dim(), 10);
    }

    #[test]
    fn strong_convexity_and_lipschitz_inequalities() {
        use rand::Rng;
        use rand::SeedableRng;
        let net = random_network_objective(3, 5, 12.0, 31).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for agent in net.agents() {
            let (mu, l) = agent.curvature();
            for _ in 0..200 {
                let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let y: Vec<f64> = (0..5).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let d = numerics::sub(&x, &y);
                let fy = agent.value(&y).unwrap();
                let gy = agent.gradient(&y).unwrap();
                let lower = fy + numerics::dot(&gy, &d) + 0.5 * mu * numerics::dot(&d, &d);
                assert!(agent.value(&x).unwrap() >= lower - 1e-9);
                let gd = numerics::sub(
                    &agent.gradient(&x).unwrap(),
                    &agent.gradient(&y).unwrap(),
                );
                assert!(norm(&gd) <= l * norm(&d) + 1e-9);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        use rand::Rng;
        use rand::SeedableRng;
        let net = random_network_objective(2, 4, 6.0, 17).unwrap();
        let obj = net.agent(0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = 1e-5;
        for _ in 0..20 {
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let g = obj.gradient(&x).unwrap();
            for j in 0..4 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fd = (obj.value(&xp).unwrap() - obj.value(&xm).unwrap()) / (2.0 * h);
                let denom = g[j].abs().max(1.0);
                assert!(
                    (fd - g[j]).abs() / denom < 1e-6,
                    "fd {fd} vs analytic {}",
                    g[j]
                );
            }
        }
    }

    #[test]
    fn not_strongly_convex_rejected() {
        let err = QuadraticAgentObjective::new(2, vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0]);
        assert!(matches!(err, Err(Error::NotStronglyConvex { .. })));
    }
}
