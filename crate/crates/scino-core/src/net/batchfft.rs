//! Row-wise FFT helpers for batched signals.

use ndarray::Array2;

use crate::diffcore::{fft_forward, fft_inverse, ComplexSignal};

/// Forward DFT of every row: returns (real, imag) spectra, B×H each.
pub fn fft_rows(x: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    let (b, h) = x.dim();
    let mut re = Array2::zeros((b, h));
    let mut im = Array2::zeros((b, h));
    for (i, row) in x.outer_iter().enumerate() {
        let spec = fft_forward(row.as_slice().expect("row-major layout"))
            .expect("non-empty row");
        re.row_mut(i).assign(&ndarray::ArrayView1::from(&spec.real));
        im.row_mut(i).assign(&ndarray::ArrayView1::from(&spec.imag));
    }
    (re, im)
}

/// Real part of the inverse DFT of every row, given split spectra.
pub fn ifft_rows_real(re: &Array2<f64>, im: &Array2<f64>) -> Array2<f64> {
    let (b, h) = re.dim();
    let mut out = Array2::zeros((b, h));
    for i in 0..b {
        let signal = ComplexSignal {
            real: re.row(i).to_vec(),
            imag: im.row(i).to_vec(),
        };
        let spatial = fft_inverse(&signal).expect("well-formed signal");
        out.row_mut(i).assign(&ndarray::ArrayView1::from(&spatial.real));
    }
    out
}

/// Complex inverse DFT of every row (both parts), used by adjoints.
pub fn ifft_rows(re: &Array2<f64>, im: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    let (b, h) = re.dim();
    let mut out_re = Array2::zeros((b, h));
    let mut out_im = Array2::zeros((b, h));
    for i in 0..b {
        let signal = ComplexSignal {
            real: re.row(i).to_vec(),
            imag: im.row(i).to_vec(),
        };
        let spatial = fft_inverse(&signal).expect("well-formed signal");
        out_re.row_mut(i).assign(&ndarray::ArrayView1::from(&spatial.real));
        out_im.row_mut(i).assign(&ndarray::ArrayView1::from(&spatial.imag));
    }
    (out_re, out_im)
}

/// Adjoint of the row-wise forward DFT applied to a real matrix: given the
/// cotangents of the (real, imag) spectra, return the cotangent of the
/// spatial input. Equals `H·Re(IFFT(g_re + i·g_im))` row-wise.
pub fn fft_rows_adjoint(g_re: &Array2<f64>, g_im: &Array2<f64>) -> Array2<f64> {
    let h = g_re.ncols() as f64;
    let mut out = ifft_rows_real(g_re, g_im);
    out.mapv_inplace(|v| v * h);
    out
}

/// Adjoint of "real part of the row-wise inverse DFT": given the cotangent
/// of the spatial output, return cotangents for the (real, imag) spectral
/// inputs. Equals `(Re(FFT(g))/H, Im(FFT(g))/H)` row-wise.
pub fn ifft_real_rows_adjoint(g: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    let h = g.ncols() as f64;
    let (mut re, mut im) = fft_rows(g);
    re.mapv_inplace(|v| v / h);
    im.mapv_inplace(|v| v / h);
    (re, im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    /// Adjoint identity <F(x), y> = <x, F*(y)> for the two adjoints above,
    /// checked on fixed small matrices.
    #[test]
    fn fft_adjoint_identity() {
        let x = array![[0.3, -1.0, 2.0, 0.7], [1.0, 0.0, -0.5, 0.25]];
        let (re, im) = fft_rows(&x);
        let g_re = array![[1.0, 0.5, -0.25, 2.0], [0.0, 1.0, 1.0, -1.0]];
        let g_im = array![[-0.5, 0.25, 1.0, 0.0], [2.0, -1.0, 0.5, 1.0]];
        let lhs: f64 = (&re * &g_re).sum() + (&im * &g_im).sum();
        let adj = fft_rows_adjoint(&g_re, &g_im);
        let rhs: f64 = (&x * &adj).sum();
        assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn ifft_real_adjoint_identity() {
        let re = array![[0.3, -1.0, 2.0, 0.7]];
        let im = array![[1.0, 0.0, -0.5, 0.25]];
        let y = ifft_rows_real(&re, &im);
        let g = array![[0.2, -0.4, 1.5, 0.9]];
        let lhs: f64 = (&y * &g).sum();
        let (a_re, a_im) = ifft_real_rows_adjoint(&g);
        let rhs: f64 = (&re * &a_re).sum() + (&im * &a_im).sum();
        assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
    }
}
