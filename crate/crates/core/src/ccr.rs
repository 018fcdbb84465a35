//! Finite-rank CCR data over families of worldline distributions: Weyl word
//! algebra, quasifree states, GNS-Gram positivity checks and the Gaussian
//! completely positive translation channels built from shift lattices.

use crate::jet::{JetDistribution, JetError};
use crate::modes::{k_map_auto, ModeError, ModeGrid, OneParticleVector};
use crate::worldline::TransportRule;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::sync::Arc;

pub const GRAM_HERMITICITY_TOL: f64 = 1e-10;
pub const GRAM_PSD_TOL: f64 = 1e-8;
pub const AUTOMORPHISM_TOL: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
pub enum CcrError {
    #[error("generator family requires real distributions")]
    NonRealGenerator,
    #[error("gram matrix violates hermiticity by {0:.3e}")]
    NotHermitian(f64),
    #[error("gram matrix not positive semidefinite: min eigenvalue {min_eig:.3e} (tolerance {tol:.3e}); quadrature failure upstream")]
    NotPositive { min_eig: f64, tol: f64 },
    #[error("words belong to families of different rank: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("noise covariance failed positivity validation after {attempts} escalations (min eig {min_eig:.3e})")]
    NoiseValidationFailed { attempts: usize, min_eig: f64 },
    #[error("shift of {steps} steps leaves no generator inside the lattice")]
    EmptyShift { steps: i64 },
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Minimum eigenvalue of a complex Hermitian matrix via the symmetric real
/// embedding [[Re, -Im], [Im, Re]].
pub fn hermitian_min_eig(h: &DMatrix<Complex64>) -> f64 {
    let n = h.nrows();
    let mut r = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let v = h[(i, j)];
            r[(i, j)] = v.re;
            r[(i + n, j + n)] = v.re;
            r[(i, j + n)] = -v.im;
            r[(i + n, j)] = v.im;
        }
    }
    // enforce exact symmetry against rounding
    let rs = (r.clone() + r.transpose()) * 0.5;
    let eig = rs.symmetric_eigen();
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// n real generators with their Gram data M, C = Re M, S = Im M.
pub struct GeneratorFamily {
    pub distributions: Vec<JetDistribution>,
    pub vectors: Vec<OneParticleVector>,
    pub gram: DMatrix<Complex64>,
    pub covariance: DMatrix<f64>,
    pub symplectic: DMatrix<f64>,
}

impl GeneratorFamily {
    pub fn rank(&self) -> usize {
        self.distributions.len()
    }
}

/// Assemble the Gram matrix M_jk = <K T_j, K T_k> and validate it.
pub fn gram_assemble(
    distributions: Vec<JetDistribution>,
    grid: &Arc<ModeGrid>,
) -> Result<GeneratorFamily, CcrError> {
    if distributions.iter().any(|d| !d.is_real()) {
        return Err(CcrError::NonRealGenerator);
    }
    let vectors: Vec<OneParticleVector> = distributions
        .iter()
        .map(|d| k_map_auto(d, grid))
        .collect::<Result<_, _>>()?;
    let n = vectors.len();
    let mut gram = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        for k in j..n {
            let v = vectors[j].inner(&vectors[k])?;
            gram[(j, k)] = v;
            if k != j {
                gram[(k, j)] = v.conj();
            }
        }
    }
    let scale = gram.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    let mut herm_defect: f64 = 0.0;
    for j in 0..n {
        for k in 0..n {
            herm_defect = herm_defect.max((gram[(j, k)] - gram[(k, j)].conj()).norm());
        }
    }
    if herm_defect > GRAM_HERMITICITY_TOL * scale {
        return Err(CcrError::NotHermitian(herm_defect));
    }
    let min_eig = hermitian_min_eig(&gram);
    let trace: f64 = (0..n).map(|j| gram[(j, j)].re).sum();
    if min_eig < -GRAM_PSD_TOL * trace.max(1e-300) {
        return Err(CcrError::NotPositive { min_eig, tol: GRAM_PSD_TOL * trace });
    }
    let covariance = DMatrix::from_fn(n, n, |i, j| gram[(i, j)].re);
    let symplectic = DMatrix::from_fn(n, n, |i, j| gram[(i, j)].im);
    Ok(GeneratorFamily { distributions, vectors, gram, covariance, symplectic })
}

/// Reduced Weyl element: amplitude times W(sum c_j T_j).
#[derive(Debug, Clone)]
pub struct WeylWord {
    pub coeff: DVector<f64>,
    pub phase: Complex64,
}

impl WeylWord {
    pub fn identity(rank: usize) -> Self {
        WeylWord { coeff: DVector::zeros(rank), phase: Complex64::new(1.0, 0.0) }
    }

    pub fn from_coeff(coeff: DVector<f64>) -> Self {
        WeylWord { coeff, phase: Complex64::new(1.0, 0.0) }
    }

    /// W(c)^* = W(-c), amplitude conjugated.
    pub fn adjoint(&self) -> WeylWord {
        WeylWord { coeff: -self.coeff.clone(), phase: self.phase.conj() }
    }
}

/// Product in canonical single-factor form: the CCR phase e^{-(i/2) c1^T S c2}
/// accumulates into the amplitude.
pub fn weyl_multiply(
    a: &WeylWord,
    b: &WeylWord,
    family: &GeneratorFamily,
) -> Result<WeylWord, CcrError> {
    if a.coeff.len() != b.coeff.len() || a.coeff.len() != family.rank() {
        return Err(CcrError::RankMismatch(a.coeff.len(), b.coeff.len()));
    }
    let cross = (family.symplectic.clone() * &b.coeff).dot(&a.coeff);
    let phase = a.phase * b.phase * Complex64::new(0.0, -0.5 * cross).exp();
    Ok(WeylWord { coeff: &a.coeff + &b.coeff, phase })
}

/// Quasifree state omega(W(c)) = exp(-1/4 c^T Q c).
#[derive(Debug, Clone)]
pub struct QuasifreeState {
    pub q: DMatrix<f64>,
}

impl QuasifreeState {
    pub fn vacuum(family: &GeneratorFamily) -> Self {
        QuasifreeState { q: family.covariance.clone() }
    }

    pub fn evaluate(&self, word: &WeylWord) -> Complex64 {
        let quad = (self.q.clone() * &word.coeff).dot(&word.coeff);
        word.phase * (-0.25 * quad).exp()
    }
}

/// Min eigenvalue of the GNS Gram matrix G_ij = omega(W(c_i)^* W(c_j)) built
/// with the CCR phase of the given antisymmetric form.
pub fn gns_gram_check(
    state: &QuasifreeState,
    form: &DMatrix<f64>,
    words: &[WeylWord],
) -> Result<f64, CcrError> {
    let k = words.len();
    let mut g = DMatrix::<Complex64>::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let a = words[i].adjoint();
            let cross = (form.clone() * &words[j].coeff).dot(&a.coeff);
            let phase = a.phase * words[j].phase * Complex64::new(0.0, -0.5 * cross).exp();
            let c = &a.coeff + &words[j].coeff;
            let quad = (state.q.clone() * &c).dot(&c);
            g[(i, j)] = phase * (-0.25 * quad).exp();
        }
    }
    Ok(hermitian_min_eig(&g))
}

/// Shift lattice T_j = Xi_{j delta} T_0 with its Gram data.
pub struct LatticeFamily {
    pub family: GeneratorFamily,
    pub step: f64,
    pub rule: TransportRule,
}

/// Build the lattice by iterated push-forward of the template.
pub fn build_shift_lattice(
    template: &JetDistribution,
    count: usize,
    step: f64,
    rule: TransportRule,
    grid: &Arc<ModeGrid>,
) -> Result<LatticeFamily, CcrError> {
    let mut dists = Vec::with_capacity(count);
    for j in 0..count {
        dists.push(template.pushforward(j as f64 * step, rule)?);
    }
    Ok(LatticeFamily { family: gram_assemble(dists, grid)?, step, rule })
}

/// Gaussian CP translation channel: W(c) -> rho(W(c)) W(Lc).
pub struct GaussianCPMap {
    pub l: DMatrix<f64>,
    pub s_defect: DMatrix<f64>,
    pub noise_cov: DMatrix<f64>,
    pub mu: f64,
    pub dropped: Vec<usize>,
    pub automorphism: bool,
    pub noise_min_eig: f64,
}

impl GaussianCPMap {
    /// alpha(W(c)) = rho(W(c)) W(Lc): shifted coefficients, amplitude damped
    /// by the Gaussian noise functional.
    pub fn apply(&self, word: &WeylWord) -> WeylWord {
        let damping = (-0.25 * (self.noise_cov.clone() * &word.coeff).dot(&word.coeff)).exp();
        WeylWord { coeff: self.l.clone() * &word.coeff, phase: word.phase * damping }
    }

    /// Pullback state omega(alpha(W(c))): quasifree with Q_rho + L^T Q L.
    pub fn compose_state(&self, state: &QuasifreeState) -> QuasifreeState {
        QuasifreeState {
            q: &self.noise_cov + self.l.transpose() * &state.q * &self.l,
        }
    }
}

/// Deterministic validation words from a 64-bit mixer.
fn validation_words(rank: usize, sets: usize, words_per_set: usize) -> Vec<Vec<WeylWord>> {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    (0..sets)
        .map(|_| {
            (0..words_per_set)
                .map(|_| {
                    WeylWord::from_coeff(DVector::from_fn(rank, |_, _| 2.0 * next()))
                })
                .collect()
        })
        .collect()
}

/// Build the translation channel for a shift of `steps` lattice indices:
/// L is the index shift (boundary generators dropped and reported), the
/// symplectic defect is s_L = S - L^T S L, and the noise functional is the
/// minimal isotropic Gaussian mu I validated by GNS positivity on
/// CCR(., s_L), with mu escalated on failure.
pub fn translation_map_build(
    lattice: &LatticeFamily,
    steps: i64,
) -> Result<GaussianCPMap, CcrError> {
    let n = lattice.family.rank();
    let mut l = DMatrix::<f64>::zeros(n, n);
    let mut dropped = Vec::new();
    for j in 0..n {
        let target = j as i64 + steps;
        if target >= 0 && (target as usize) < n {
            l[(target as usize, j)] = 1.0;
        } else {
            dropped.push(j);
        }
    }
    if dropped.len() == n {
        return Err(CcrError::EmptyShift { steps });
    }
    let s = &lattice.family.symplectic;
    let mut s_defect = s - l.transpose() * s * &l;
    // the channel acts on the subalgebra of retained generators; boundary
    // rows and columns are excluded from the defect form
    for &j in &dropped {
        for k in 0..n {
            s_defect[(j, k)] = 0.0;
            s_defect[(k, j)] = 0.0;
        }
    }
    let spectral = s_defect.clone().svd(false, false).singular_values.max();
    if spectral <= AUTOMORPHISM_TOL {
        return Ok(GaussianCPMap {
            l,
            s_defect,
            noise_cov: DMatrix::zeros(n, n),
            mu: 0.0,
            dropped,
            automorphism: true,
            noise_min_eig: 0.0,
        });
    }
    let mut mu = 2.0 * spectral;
    let word_sets = validation_words(n, 4, 5);
    let mut last_min = f64::INFINITY;
    for attempt in 0..4 {
        let noise = QuasifreeState { q: DMatrix::identity(n, n) * mu };
        let mut ok = true;
        for words in &word_sets {
            let min_eig = gns_gram_check(&noise, &s_defect, words)?;
            last_min = last_min.min(min_eig);
            if min_eig < -1e-9 {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(GaussianCPMap {
                l,
                s_defect,
                noise_cov: DMatrix::identity(n, n) * mu,
                mu,
                dropped,
                automorphism: false,
                noise_min_eig: last_min,
            });
        }
        mu *= 2.0;
        let _ = attempt;
    }
    Err(CcrError::NoiseValidationFailed { attempts: 3, min_eig: last_min })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Coefficient;
    use crate::jet::MultiIndex;
    use crate::profile::{GaussianBump, Profile};
    use crate::worldline::{InertialLine, RindlerLine, Worldline};

    fn inertial() -> Worldline {
        Worldline::new(Arc::new(InertialLine::at_rest()))
    }

    fn bump(center: f64, width: f64, amp: f64) -> Profile {
        Arc::new(GaussianBump { center, width, amplitude: amp })
    }

    fn grid() -> Arc<ModeGrid> {
        ModeGrid::new(1.0, 10.0, 12, 2).unwrap()
    }

    fn vacuum_lattice(n: usize) -> LatticeFamily {
        let t = JetDistribution::order0(inertial(), bump(0.0, 2.0, 2.2)).unwrap();
        build_shift_lattice(&t, n, 0.8, TransportRule::FermiWalker, &grid()).unwrap()
    }

    #[test]
    fn rank_one_gram_is_a_nonnegative_number() {
        let t = JetDistribution::order0(inertial(), bump(0.0, 2.0, 1.0)).unwrap();
        let fam = gram_assemble(vec![t], &grid()).unwrap();
        assert_eq!(fam.rank(), 1);
        assert!(fam.gram[(0, 0)].re >= 0.0);
        assert!(fam.gram[(0, 0)].im.abs() <= 1e-14 * fam.gram[(0, 0)].re);
    }

    #[test]
    fn disjoint_angular_content_gives_zero_off_diagonal() {
        let g = grid();
        let t0 = JetDistribution::order0(inertial(), bump(0.0, 2.0, 1.0)).unwrap();
        let t1 = JetDistribution::new(
            inertial(),
            vec![(MultiIndex([0, 1, 0]), Coefficient::single(bump(0.3, 1.5, 1.0)))],
        )
        .unwrap();
        let fam = gram_assemble(vec![t0, t1], &g).unwrap();
        assert!(fam.gram[(0, 1)].norm() <= 1e-10 * fam.gram[(0, 0)].re);
    }

    #[test]
    fn inertial_lattice_gram_is_toeplitz() {
        let lat = vacuum_lattice(6);
        let m = &lat.family.gram;
        let scale = m[(0, 0)].norm();
        for j in 0..5 {
            for k in 0..5 {
                assert!(
                    (m[(j + 1, k + 1)] - m[(j, k)]).norm() <= 1e-8 * scale,
                    "toeplitz defect at ({j},{k})"
                );
            }
        }
    }

    #[test]
    fn weyl_algebra_relations() {
        let lat = vacuum_lattice(4);
        let fam = &lat.family;
        let mut c1 = DVector::zeros(4);
        c1[0] = 0.7;
        c1[2] = -0.3;
        let mut c2 = DVector::zeros(4);
        c2[1] = 0.4;
        c2[3] = 0.9;
        let w1 = WeylWord::from_coeff(c1.clone());
        let w2 = WeylWord::from_coeff(c2.clone());
        // W(c) W(-c) = identity
        let prod = weyl_multiply(&w1, &w1.adjoint(), fam).unwrap();
        assert!(prod.coeff.norm() == 0.0);
        assert!((prod.phase - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        // commutator phase: W(c1) W(c2) = e^{-i c1^T S c2} W(c2) W(c1)
        let p12 = weyl_multiply(&w1, &w2, fam).unwrap();
        let p21 = weyl_multiply(&w2, &w1, fam).unwrap();
        let cross = (fam.symplectic.clone() * &c2).dot(&c1);
        let expected = Complex64::new(0.0, -cross).exp();
        assert!(((p12.phase / p21.phase) - expected).norm() < 1e-13);
    }

    #[test]
    fn weyl_associativity_on_random_triples() {
        let lat = vacuum_lattice(4);
        let fam = &lat.family;
        let sets = validation_words(4, 20, 3);
        for set in sets {
            let ab_c = weyl_multiply(&weyl_multiply(&set[0], &set[1], fam).unwrap(), &set[2], fam)
                .unwrap();
            let a_bc = weyl_multiply(&set[0], &weyl_multiply(&set[1], &set[2], fam).unwrap(), fam)
                .unwrap();
            assert!((ab_c.phase - a_bc.phase).norm() < 1e-12);
            assert!((ab_c.coeff.clone() - a_bc.coeff).norm() < 1e-12);
        }
    }

    #[test]
    fn state_evaluation_basics() {
        let lat = vacuum_lattice(3);
        let state = QuasifreeState::vacuum(&lat.family);
        assert_eq!(state.evaluate(&WeylWord::identity(3)), Complex64::new(1.0, 0.0));
        let w = WeylWord::from_coeff(DVector::from_vec(vec![0.3, -0.8, 0.5]));
        assert!(state.evaluate(&w).norm() <= 1.0);
        // cross-module identity: omega(W(c)) = exp(-1/4 ||K(sum c_j T_j)||^2)
        let c = [0.6, -0.2, 0.4];
        let mut combo = JetDistribution::linear_combination(
            Complex64::new(c[0], 0.0),
            &lat.family.distributions[0],
            Complex64::new(c[1], 0.0),
            &lat.family.distributions[1],
        )
        .unwrap();
        combo = JetDistribution::linear_combination(
            Complex64::new(1.0, 0.0),
            &combo,
            Complex64::new(c[2], 0.0),
            &lat.family.distributions[2],
        )
        .unwrap();
        let norm2 = crate::modes::detector_norm(&combo, &grid()).unwrap();
        let direct = (-0.25 * norm2).exp();
        let via_state = state.evaluate(&WeylWord::from_coeff(DVector::from_vec(c.to_vec()))).re;
        assert!(
            (direct - via_state).abs() <= 1e-8 * direct,
            "{direct} vs {via_state}"
        );
    }

    #[test]
    fn vacuum_family_passes_gns_gram_check() {
        let lat = vacuum_lattice(4);
        let state = QuasifreeState::vacuum(&lat.family);
        assert!(
            (gns_gram_check(&state, &lat.family.symplectic, &[WeylWord::identity(4)]).unwrap()
                - 1.0)
                .abs()
                < 1e-12
        );
        for words in validation_words(4, 5, 5) {
            let min_eig = gns_gram_check(&state, &lat.family.symplectic, &words).unwrap();
            assert!(min_eig >= -1e-10, "min eig {min_eig}");
        }
    }

    #[test]
    fn corrupted_covariance_is_detected() {
        let lat = vacuum_lattice(4);
        let bad = QuasifreeState { q: lat.family.covariance.clone() * 0.1 };
        let mut worst = f64::INFINITY;
        for words in validation_words(4, 5, 5) {
            worst = worst.min(gns_gram_check(&bad, &lat.family.symplectic, &words).unwrap());
        }
        assert!(worst < -1e-3, "detector failed: min eig {worst}");
    }

    #[test]
    fn inertial_translation_is_an_automorphism() {
        let lat = vacuum_lattice(6);
        let map = translation_map_build(&lat, 1).unwrap();
        assert!(map.automorphism);
        assert_eq!(map.dropped, vec![5]);
        assert_eq!(map.mu, 0.0);
        let w = WeylWord::from_coeff(DVector::from_vec(vec![0.5, -0.3, 0.8, 0.0, 0.0, 0.0]));
        let out = map.apply(&w);
        assert!((out.phase.norm() - 1.0).abs() < 1e-15); // no damping
        assert_eq!(out.coeff[1], 0.5);
        assert_eq!(out.coeff[3], 0.8);
    }

    #[test]
    fn semigroup_on_interior_words() {
        let lat = vacuum_lattice(6);
        let m1 = translation_map_build(&lat, 1).unwrap();
        let m2 = translation_map_build(&lat, 2).unwrap();
        let w = WeylWord::from_coeff(DVector::from_vec(vec![0.4, -0.7, 0.2, 0.0, 0.0, 0.0]));
        let seq = m1.apply(&m1.apply(&w));
        let direct = m2.apply(&w);
        assert!((seq.coeff.clone() - direct.coeff).norm() < 1e-12);
        assert!((seq.phase - direct.phase).norm() < 1e-10);
    }

    #[test]
    fn empty_shift_is_an_error() {
        let lat = vacuum_lattice(3);
        assert!(matches!(
            translation_map_build(&lat, 5),
            Err(CcrError::EmptyShift { steps: 5 })
        ));
    }

    #[test]
    fn rindler_order1_channel_has_defect_and_valid_noise() {
        let w = Worldline::new(Arc::new(RindlerLine { accel: 1.0 }));
        let template = JetDistribution::new(
            w,
            vec![
                (MultiIndex::ZERO, Coefficient::single(bump(0.0, 1.0, 2.0))),
                (MultiIndex([1, 0, 0]), Coefficient::single(bump(0.0, 1.0, 1.5))),
            ],
        )
        .unwrap();
        let g = ModeGrid::new(0.0, 14.0, 16, 3).unwrap();
        let lat = build_shift_lattice(&template, 4, 0.5, TransportRule::ParallelLab, &g).unwrap();
        let map = translation_map_build(&lat, 1).unwrap();
        assert!(!map.automorphism, "expected a symplectic defect, got automorphism");
        assert!(map.mu > 0.0);
        assert!(map.noise_min_eig >= -1e-9);
        // the composed functional omega . alpha stays a state
        let state = QuasifreeState::vacuum(&lat.family);
        let composed = map.compose_state(&state);
        for words in validation_words(4, 5, 5) {
            let min_eig = gns_gram_check(&composed, &lat.family.symplectic, &words).unwrap();
            assert!(min_eig >= -1e-9, "composed state min eig {min_eig}");
        }
    }
}
