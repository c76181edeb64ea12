//! Discrete Fourier transform over any element type that forms a linear
//! space over `f64` twiddle factors.
//!
//! All modes are kept (no truncation). Power-of-two lengths take the
//! iterative radix-2 path; everything else falls back to the direct O(H²)
//! summation. The forward transform is unnormalized; the inverse carries
//! the 1/H factor.

use num_traits::Float;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use super::HyperDual;

/// Element of a linear space over `f64`: enough structure for butterflies.
pub trait LinearElem: Copy {
    fn lin_zero() -> Self;
    fn lin_add(self, rhs: Self) -> Self;
    fn lin_sub(self, rhs: Self) -> Self;
    fn lin_scale(self, k: f64) -> Self;
}

impl LinearElem for f64 {
    fn lin_zero() -> Self {
        0.0
    }
    fn lin_add(self, rhs: Self) -> Self {
        self + rhs
    }
    fn lin_sub(self, rhs: Self) -> Self {
        self - rhs
    }
    fn lin_scale(self, k: f64) -> Self {
        self * k
    }
}

impl LinearElem for f32 {
    fn lin_zero() -> Self {
        0.0
    }
    fn lin_add(self, rhs: Self) -> Self {
        self + rhs
    }
    fn lin_sub(self, rhs: Self) -> Self {
        self - rhs
    }
    fn lin_scale(self, k: f64) -> Self {
        self * k as f32
    }
}

impl<T: Float> LinearElem for HyperDual<T> {
    fn lin_zero() -> Self {
        HyperDual::constant(T::zero())
    }
    fn lin_add(self, rhs: Self) -> Self {
        self + rhs
    }
    fn lin_sub(self, rhs: Self) -> Self {
        self - rhs
    }
    fn lin_scale(self, k: f64) -> Self {
        let k = T::from(k).unwrap();
        HyperDual::new(self.v * k, self.da * k, self.db * k, self.dab * k)
    }
}

/// Spectrum as parallel real/imaginary vectors of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal<E> {
    pub real: Vec<E>,
    pub imag: Vec<E>,
}

impl<E: LinearElem> ComplexSignal<E> {
    pub fn from_real(real: &[E]) -> Self {
        Self {
            real: real.to_vec(),
            imag: vec![E::lin_zero(); real.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.real.len()
    }

    pub fn is_empty(&self) -> bool {
        self.real.is_empty()
    }
}

/// Full forward DFT of a real vector: `ξ_k = Σ_n x_n e^{-2πikn/H}`.
pub fn fft_forward<E: LinearElem>(x: &[E]) -> Result<ComplexSignal<E>> {
    if x.is_empty() {
        return Err(Error::Data("fft_forward: empty input".into()));
    }
    let mut signal = ComplexSignal::from_real(x);
    transform(&mut signal, Direction::Forward);
    Ok(signal)
}

/// Inverse DFT with 1/H normalization: `x_n = (1/H) Σ_k ξ_k e^{+2πikn/H}`.
/// The result is complex in general; callers take the real part when the
/// spatial signal must stay real.
pub fn fft_inverse<E: LinearElem>(s: &ComplexSignal<E>) -> Result<ComplexSignal<E>> {
    if s.real.len() != s.imag.len() {
        return Err(Error::Data(format!(
            "fft_inverse: real/imag length mismatch ({} vs {})",
            s.real.len(),
            s.imag.len()
        )));
    }
    if s.is_empty() {
        return Err(Error::Data("fft_inverse: empty input".into()));
    }
    let mut out = s.clone();
    transform(&mut out, Direction::Inverse);
    let scale = 1.0 / s.len() as f64;
    for e in out.real.iter_mut().chain(out.imag.iter_mut()) {
        *e = e.lin_scale(scale);
    }
    Ok(out)
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        }
    }
}

fn transform<E: LinearElem>(signal: &mut ComplexSignal<E>, dir: Direction) {
    let h = signal.len();
    if h.is_power_of_two() {
        radix2(signal, dir);
    } else {
        direct(signal, dir);
    }
}

/// Iterative radix-2 Cooley–Tukey with bit-reversal permutation.
fn radix2<E: LinearElem>(signal: &mut ComplexSignal<E>, dir: Direction) {
    let h = signal.len();
    let re = &mut signal.real;
    let im = &mut signal.imag;

    // bit-reversal permutation
    let bits = h.trailing_zeros();
    for i in 0..h {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            re.swap(i, j);
            im.swap(i, j);
        }
    }

    let sign = dir.sign();
    let mut len = 2;
    while len <= h {
        let ang = sign * 2.0 * PI / len as f64;
        for start in (0..h).step_by(len) {
            for k in 0..len / 2 {
                let (wc, ws) = ((ang * k as f64).cos(), (ang * k as f64).sin());
                let i = start + k;
                let j = i + len / 2;
                // t = w * s[j]
                let tr = re[j].lin_scale(wc).lin_sub(im[j].lin_scale(ws));
                let ti = re[j].lin_scale(ws).lin_add(im[j].lin_scale(wc));
                re[j] = re[i].lin_sub(tr);
                im[j] = im[i].lin_sub(ti);
                re[i] = re[i].lin_add(tr);
                im[i] = im[i].lin_add(ti);
            }
        }
        len <<= 1;
    }
}

/// Direct O(H²) summation for non-power-of-two lengths.
fn direct<E: LinearElem>(signal: &mut ComplexSignal<E>, dir: Direction) {
    let h = signal.len();
    let sign = dir.sign();
    let mut out_re = vec![E::lin_zero(); h];
    let mut out_im = vec![E::lin_zero(); h];
    for (k, (or, oi)) in out_re.iter_mut().zip(out_im.iter_mut()).enumerate() {
        let mut acc_re = E::lin_zero();
        let mut acc_im = E::lin_zero();
        for n in 0..h {
            let ang = sign * 2.0 * PI * (k * n % h) as f64 / h as f64;
            let (c, s) = (ang.cos(), ang.sin());
            acc_re = acc_re.lin_add(signal.real[n].lin_scale(c).lin_sub(signal.imag[n].lin_scale(s)));
            acc_im = acc_im.lin_add(signal.real[n].lin_scale(s).lin_add(signal.imag[n].lin_scale(c)));
        }
        *or = acc_re;
        *oi = acc_im;
    }
    signal.real = out_re;
    signal.imag = out_im;
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn constant_vector_is_dc_only() {
        let c = 0.8;
        let h = 8;
        let spec = fft_forward(&vec![c; h]).unwrap();
        assert!((spec.real[0] - h as f64 * c).abs() < 1e-12);
        for k in 1..h {
            assert!(spec.real[k].abs() < 1e-12);
        }
        for k in 0..h {
            assert!(spec.imag[k].abs() < 1e-12);
        }
    }

    #[test]
    fn dc_spectrum_inverts_to_ones() {
        let h = 8;
        let mut s = ComplexSignal::from_real(&vec![0.0; h]);
        s.real[0] = h as f64;
        let x = fft_inverse(&s).unwrap();
        for n in 0..h {
            assert!((x.real[n] - 1.0).abs() < 1e-12);
            assert!(x.imag[n].abs() < 1e-12);
        }
    }

    #[test]
    fn single_mode_matches_direct_summation_oracle() {
        // One pass of the plain DFT summation definition, written
        // independently of the transform code paths.
        let h = 8;
        let mut s = ComplexSignal::from_real(&vec![0.0; h]);
        s.real[3] = 1.0;
        let x = fft_inverse(&s).unwrap();
        for n in 0..h {
            let ang = 2.0 * PI * 3.0 * n as f64 / h as f64;
            assert!((x.real[n] - ang.cos() / h as f64).abs() < 1e-12);
            assert!((x.imag[n] - ang.sin() / h as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn non_power_of_two_roundtrip() {
        let x: Vec<f64> = (0..6).map(|i| (i as f64 * 0.7).sin()).collect();
        let back = fft_inverse(&fft_forward(&x).unwrap()).unwrap();
        for (a, b) in x.iter().zip(&back.real) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_input_rejected() {
        assert!(fft_forward::<f64>(&[]).is_err());
    }

    #[test]
    fn mismatched_signal_rejected() {
        let s = ComplexSignal { real: vec![1.0, 2.0], imag: vec![0.0] };
        assert!(fft_inverse(&s).is_err());
    }

    #[test]
    fn roundtrip_large_power_of_two() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(5);
        let h = 4096;
        let x: Vec<f64> = (0..h).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let back = fft_inverse(&fft_forward(&x).unwrap()).unwrap();
        let max_err = x
            .iter()
            .zip(&back.real)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(max_err < 1e-12, "roundtrip max abs error {max_err}");
    }

    #[test]
    fn hyperdual_fft_is_linear_map() {
        // FFT of hyper-dual inputs: derivative slots transform exactly like
        // values, because the DFT is linear.
        let x = [0.3, -1.2, 0.8, 2.0];
        let seeded: Vec<HyperDual<f64>> =
            x.iter().map(|&v| HyperDual::new(v, v * 2.0, -v, 0.5 * v)).collect();
        let spec = fft_forward(&seeded).unwrap();
        let plain = fft_forward(&x.to_vec()).unwrap();
        for k in 0..4 {
            assert!((spec.real[k].v - plain.real[k]).abs() < 1e-12);
            assert!((spec.real[k].da - 2.0 * plain.real[k]).abs() < 1e-12);
            assert!((spec.imag[k].db + plain.imag[k]).abs() < 1e-12);
            assert!((spec.imag[k].dab - 0.5 * plain.imag[k]).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn roundtrip_identity(x in proptest::collection::vec(-10.0f64..10.0, 8)) {
            let back = fft_inverse(&fft_forward(&x).unwrap()).unwrap();
            for (a, b) in x.iter().zip(&back.real) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            for b in &back.imag {
                prop_assert!(b.abs() < 1e-12);
            }
        }

        #[test]
        fn linearity(
            x in proptest::collection::vec(-5.0f64..5.0, 8),
            y in proptest::collection::vec(-5.0f64..5.0, 8),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
        ) {
            let combo: Vec<f64> = x.iter().zip(&y).map(|(xi, yi)| a * xi + b * yi).collect();
            let fc = fft_forward(&combo).unwrap();
            let fx = fft_forward(&x).unwrap();
            let fy = fft_forward(&y).unwrap();
            for k in 0..8 {
                prop_assert!((fc.real[k] - (a * fx.real[k] + b * fy.real[k])).abs() < 1e-12);
                prop_assert!((fc.imag[k] - (a * fx.imag[k] + b * fy.imag[k])).abs() < 1e-12);
            }
        }

        /// Parseval: ‖x‖² = (1/H)·‖FFT(x)‖².
        #[test]
        fn parseval(x in proptest::collection::vec(-10.0f64..10.0, 16)) {
            let spec = fft_forward(&x).unwrap();
            let spatial: f64 = x.iter().map(|v| v * v).sum();
            let spectral: f64 = spec
                .real
                .iter()
                .zip(&spec.imag)
                .map(|(r, i)| r * r + i * i)
                .sum::<f64>()
                / 16.0;
            prop_assert!((spatial - spectral).abs() <= 1e-10 * spatial.max(1.0));
        }
    }
}
