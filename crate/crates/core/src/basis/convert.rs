//! Change of single-particle basis between the circular and Cartesian
//! conventions, and the projection onto the `n_y = 0` two-mode slice.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix2};

use super::{Convention, FockBasis, Occupation};
use crate::error::{Error, Result};
use crate::sparse::C64;
use crate::states::QuantumState;

/// Probability below which a projection is treated as empty.
pub const DEPLETION_TOL: f64 = 1e-300;

/// Creation-operator map `a_k^dag(from) = sum_j M[j, k] a_j^dag(to)`, with
/// index 0 the first slot and 1 the second slot.
fn single_particle_map(from: Convention, to: Convention) -> Matrix2<C64> {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let ih = C64::new(0.0, FRAC_1_SQRT_2);
    match (from, to) {
        (Convention::Circular, Convention::Cartesian) => Matrix2::new(-h, h, -ih, -ih),
        (Convention::Cartesian, Convention::Circular) => Matrix2::new(-h, ih, h, ih),
        _ => Matrix2::identity(),
    }
}

/// Hermitian `K` with `exp(-i K) = m` for a unitary 2x2 `m`.
fn unitary_generator(m: &Matrix2<C64>) -> Matrix2<C64> {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (tr * tr - 4.0 * det).sqrt();
    let lambdas = [(tr + disc) / 2.0, (tr - disc) / 2.0];
    if disc.norm() < 1e-14 {
        return Matrix2::identity() * C64::new(-lambdas[0].arg(), 0.0);
    }
    let mut k = Matrix2::zeros();
    for lam in lambdas {
        let v = if m[(1, 0)].norm() > 1e-14 {
            nalgebra::Vector2::new(lam - m[(1, 1)], m[(1, 0)])
        } else if m[(0, 1)].norm() > 1e-14 {
            nalgebra::Vector2::new(m[(0, 1)], lam - m[(0, 0)])
        } else if (lam - m[(0, 0)]).norm() < (lam - m[(1, 1)]).norm() {
            nalgebra::Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0))
        } else {
            nalgebra::Vector2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0))
        };
        let v = v.normalize();
        k += v * v.adjoint() * C64::new(-lam.arg(), 0.0);
    }
    k
}

/// Express `state` in the other mode convention.
///
/// The single-particle rotation is lifted to Fock space as `exp(-i G)`,
/// where `G = sum_jk K_jk a_j^dag a_k` is its quadratic generator. `G`
/// conserves the number of vibron quanta, so the exponential is taken
/// block by block. The result lives on `target`, which must be in the other
/// convention; a filtered target that does not hold the image is an error.
pub fn convert_convention(state: &QuantumState, target: &Arc<FockBasis>) -> Result<QuantumState> {
    let src = state.basis();
    let n = src.total_n();
    if target.total_n() != n {
        return Err(Error::BasisMismatch(format!(
            "conversion changes N from {n} to {}",
            target.total_n()
        )));
    }
    if target.convention() == src.convention() {
        return Err(Error::BasisMismatch("target basis is in the same convention".into()));
    }
    let k = unitary_generator(&single_particle_map(src.convention(), target.convention()));

    let mut out = DVector::<C64>::zeros(target.dim());
    let mut lost = 0.0;
    for nv in 0..=n {
        let n0 = n - nv;
        let occ = |a: u32| Occupation::new(a, n0, nv - a);
        let dim = nv as usize + 1;
        let psi = DVector::from_iterator(dim, (0..=nv).map(|a| state.amplitude(&occ(a))));
        if psi.iter().all(|c| c.norm_sqr() == 0.0) {
            continue;
        }
        // |a, nv-a> in the (first, second) pair
        let mut g = DMatrix::<C64>::zeros(dim, dim);
        for a in 0..=nv as usize {
            let b = nv as usize - a;
            g[(a, a)] += k[(0, 0)] * a as f64 + k[(1, 1)] * b as f64;
            if b > 0 {
                g[(a + 1, a)] += k[(0, 1)] * (((a + 1) * b) as f64).sqrt();
            }
            if a > 0 {
                g[(a - 1, a)] += k[(1, 0)] * ((a * (b + 1)) as f64).sqrt();
            }
        }
        let u = (g * C64::new(0.0, -1.0)).exp();
        let phi = u * psi;
        for (a, amp) in phi.iter().enumerate() {
            match target.index_of(&occ(a as u32)) {
                Some(i) => out[i] = *amp,
                None => lost += amp.norm_sqr(),
            }
        }
    }
    if lost > 1e-12 {
        return Err(Error::BlockLeak { leak: lost });
    }
    QuantumState::normalized(target.clone(), out)
}

/// Amplitudes of the `n_y = 0` slice, indexed by `n_x`.
#[derive(Debug, Clone)]
pub struct TwoModeProjection {
    /// Renormalized amplitudes on `|n_x> = |n_x, N - n_x, 0>`.
    pub amplitudes: Vec<C64>,
    /// Probability in the slice before renormalization.
    pub retained_weight: f64,
}

/// Slice a Cartesian state onto `|n_x, N - n_x, 0>` and renormalize.
pub fn project_two_mode(state: &QuantumState) -> Result<TwoModeProjection> {
    let basis = state.basis();
    if basis.convention() != Convention::Cartesian {
        return Err(Error::WrongConvention {
            what: "two-mode projection",
            expected: "cartesian",
        });
    }
    let n = basis.total_n();
    let mut amps: Vec<C64> = (0..=n)
        .map(|k| state.amplitude(&Occupation::new(k, n - k, 0)))
        .collect();
    let weight: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if weight <= DEPLETION_TOL {
        return Err(Error::SubspaceDepleted);
    }
    let scale = 1.0 / weight.sqrt();
    for a in &mut amps {
        *a *= scale;
    }
    Ok(TwoModeProjection {
        amplitudes: amps,
        retained_weight: weight,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BlockFilter;
    use crate::numeric::LogFactorial;

    fn full(n: u32, c: Convention) -> Arc<FockBasis> {
        Arc::new(FockBasis::full(n, c))
    }

    fn pseudo_random_state(basis: Arc<FockBasis>, seed: u64) -> QuantumState {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let amps = DVector::from_fn(basis.dim(), |_, _| C64::new(next(), next()));
        QuantumState::normalized(basis, amps).unwrap()
    }

    #[test]
    fn generator_reproduces_map() {
        for (a, b) in [
            (Convention::Circular, Convention::Cartesian),
            (Convention::Cartesian, Convention::Circular),
        ] {
            let m = single_particle_map(a, b);
            let k = unitary_generator(&m);
            assert!((k - k.adjoint()).norm() < 1e-14);
            let u = (k * C64::new(0.0, -1.0)).exp();
            assert!((u - m).norm() < 1e-13);
        }
    }

    #[test]
    fn sigma_condensate_is_unchanged() {
        for n in [0, 1, 5, 12] {
            let s = QuantumState::number_state(full(n, Convention::Circular), Occupation::new(0, n, 0)).unwrap();
            let c = convert_convention(&s, &full(n, Convention::Cartesian)).unwrap();
            assert!((c.amplitude(&Occupation::new(0, n, 0)) - C64::new(1.0, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn single_plus_quantum() {
        let s = QuantumState::number_state(full(1, Convention::Circular), Occupation::new(1, 0, 0)).unwrap();
        let c = convert_convention(&s, &full(1, Convention::Cartesian)).unwrap();
        let h = FRAC_1_SQRT_2;
        assert!((c.amplitude(&Occupation::new(1, 0, 0)) - C64::new(-h, 0.0)).norm() < 1e-13);
        assert!((c.amplitude(&Occupation::new(0, 0, 1)) - C64::new(0.0, -h)).norm() < 1e-13);
    }

    /// Expand `(A^dag)^a (B^dag)^b / sqrt(a! b!)` with `A^dag = p x + q y`.
    fn binomial_image(a: u32, b: u32, m: &Matrix2<C64>) -> Vec<(u32, C64)> {
        let lf = LogFactorial::new(64);
        let mut out = vec![C64::new(0.0, 0.0); (a + b + 1) as usize];
        for i in 0..=a {
            for j in 0..=b {
                let coeff = (lf.binomial(a as usize, i as usize) + lf.binomial(b as usize, j as usize)).exp()
                    * m[(0, 0)].powu(i)
                    * m[(1, 0)].powu(a - i)
                    * m[(0, 1)].powu(j)
                    * m[(1, 1)].powu(b - j);
                let nx = i + j;
                let ny = a + b - nx;
                let fock = (0.5 * (lf.get(nx as usize) + lf.get(ny as usize) - lf.get(a as usize) - lf.get(b as usize))).exp();
                out[nx as usize] += coeff * fock;
            }
        }
        out.into_iter().enumerate().map(|(k, c)| (k as u32, c)).collect()
    }

    #[test]
    fn matches_binomial_expansion() {
        let n = 6;
        let m = single_particle_map(Convention::Circular, Convention::Cartesian);
        let circ = full(n, Convention::Circular);
        let cart = full(n, Convention::Cartesian);
        for occ in circ.states() {
            let s = QuantumState::number_state(circ.clone(), *occ).unwrap();
            let c = convert_convention(&s, &cart).unwrap();
            let nv = occ.first() + occ.second();
            for (nx, amp) in binomial_image(occ.first(), occ.second(), &m) {
                let got = c.amplitude(&Occupation::new(nx, occ.zero(), nv - nx));
                assert!((got - amp).norm() < 1e-12, "{occ} nx={nx}: {got} vs {amp}");
            }
        }
    }

    #[test]
    fn round_trip_is_identity() {
        for n in [1, 4, 9] {
            let s = pseudo_random_state(full(n, Convention::Circular), n as u64);
            let c = convert_convention(&s, &full(n, Convention::Cartesian)).unwrap();
            assert!((c.norm() - 1.0).abs() < 1e-12);
            let back = convert_convention(&c, &full(n, Convention::Circular)).unwrap();
            assert!((back.amplitudes() - s.amplitudes()).norm() < 1e-12);
        }
    }

    #[test]
    fn filtered_input_converts_into_full_target() {
        let n = 6;
        let block = Arc::new(FockBasis::enumerate(n, Convention::Circular, BlockFilter::FixedL(0)).unwrap());
        let s = pseudo_random_state(block, 3);
        let c = convert_convention(&s, &full(n, Convention::Cartesian)).unwrap();
        assert!((c.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn filtered_target_rejects_leaking_image() {
        let n = 6;
        let s = QuantumState::number_state(full(n, Convention::Cartesian), Occupation::new(3, 0, 3)).unwrap();
        let band = Arc::new(FockBasis::enumerate(n, Convention::Circular, BlockFilter::FixedL(0)).unwrap());
        assert!(matches!(convert_convention(&s, &band), Err(Error::BlockLeak { .. })));
    }

    #[test]
    fn projection_examples() {
        let n = 5;
        let cart = full(n, Convention::Cartesian);
        let s = QuantumState::number_state(cart.clone(), Occupation::new(0, n, 0)).unwrap();
        let p = project_two_mode(&s).unwrap();
        assert_eq!(p.retained_weight, 1.0);
        assert_eq!(p.amplitudes[0], C64::new(1.0, 0.0));

        let mut amps = DVector::zeros(cart.dim());
        amps[cart.index_of(&Occupation::new(0, n, 0)).unwrap()] = C64::new(FRAC_1_SQRT_2, 0.0);
        amps[cart.index_of(&Occupation::new(0, n - 1, 1)).unwrap()] = C64::new(FRAC_1_SQRT_2, 0.0);
        let s = QuantumState::normalized(cart.clone(), amps).unwrap();
        let p = project_two_mode(&s).unwrap();
        assert!((p.retained_weight - 0.5).abs() < 1e-15);
        assert!((p.amplitudes[0].re - 1.0).abs() < 1e-15);

        let s = QuantumState::number_state(cart, Occupation::new(0, 0, n)).unwrap();
        assert_eq!(project_two_mode(&s).unwrap_err(), Error::SubspaceDepleted);
    }

    #[test]
    fn projection_of_coherent_pair() {
        // (sigma^dag + tau_x^dag)^2 / (2 sqrt(2!)) |vac> = 1/2 |0,2,0> + 1/sqrt2 |1,1,0> + 1/2 |2,0,0>
        let s = crate::states::coherent3(1.0, 0.0, 2).unwrap();
        let p = project_two_mode(&s).unwrap();
        assert!((p.retained_weight - 1.0).abs() < 1e-14);
        let want = [0.5, FRAC_1_SQRT_2, 0.5];
        for (a, w) in p.amplitudes.iter().zip(want) {
            assert!((a.re - w).abs() < 1e-14 && a.im.abs() < 1e-15);
        }
    }

    #[test]
    fn circular_input_is_rejected() {
        let s = QuantumState::number_state(full(2, Convention::Circular), Occupation::new(0, 2, 0)).unwrap();
        assert!(project_two_mode(&s).is_err());
    }
}
