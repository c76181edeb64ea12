//! The score network: a linear lift of the D input variables into an
//! H-dimensional latent signal, L spectral layers that transform the
//! signal with an FFT, modulate it with a learnable time encoding, mix
//! real and imaginary parts through an affine+norm block and return via
//! inverse FFT with a skip connection, and a final three-stage readout
//! back to D outputs.

mod batchfft;
mod forward;
mod hyperdual_pass;

pub use forward::{param_gradient, TrainTape};
pub use hyperdual_pass::Hd4;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Negative-side slope of every LeakyReLU in the network. The derivative
/// at exactly zero is defined as this slope.
pub const LEAKY_SLOPE: f64 = 0.01;

/// Epsilon inside normalization denominators.
pub const NORM_EPS: f64 = 1e-5;

/// Running-statistics momentum for the normalization layers.
pub const NORM_MOMENTUM: f64 = 0.1;

/// Architecture sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    /// Number of observed variables.
    pub d: usize,
    /// Latent signal width.
    pub h: usize,
    /// Intermediate width of the final readout.
    pub s: usize,
    /// Fourier-feature count of the time encoding.
    pub f_lte: usize,
    /// Hidden width of the time-encoding MLP.
    pub m_lte: usize,
    /// Number of spectral layers.
    pub l_layers: usize,
    /// Dropout probability after the initial lift (train mode only).
    pub dropout_rate: f64,
}

impl HyperParams {
    /// Full-scale profile for synthetic experiments.
    pub fn paper_synthetic(d: usize) -> Self {
        Self {
            d,
            h: 1024.max(5 * d),
            s: 128.max(3 * d),
            f_lte: 32,
            m_lte: 128,
            l_layers: 10,
            dropout_rate: 0.2,
        }
    }

    /// Full-scale profile for real tabular data (a single spectral layer).
    pub fn paper_real(d: usize) -> Self {
        Self {
            l_layers: 1,
            ..Self::paper_synthetic(d)
        }
    }

    /// Small CPU profile: H and S shrink uniformly, H stays a power of two
    /// so the FFT keeps its fast path.
    pub fn desk(d: usize) -> Self {
        let h = 64usize.max((2 * d).next_power_of_two());
        Self {
            d,
            h,
            s: 32.max(d),
            f_lte: 32,
            m_lte: 128,
            l_layers: 2,
            dropout_rate: 0.2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.h == 0 || self.s == 0 || self.f_lte == 0 || self.m_lte == 0 {
            return Err(Error::Config("all widths must be positive".into()));
        }
        if self.l_layers == 0 {
            return Err(Error::Config("at least one spectral layer required".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Config(format!(
                "dropout_rate {} outside [0,1)",
                self.dropout_rate
            )));
        }
        Ok(())
    }
}

/// Parameters of one spectral layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralLayerParams {
    /// Affine mix of `[Re, Im]`, shape 2H×2H.
    pub w_spec: Array2<f64>,
    pub b_spec: Array1<f64>,
    pub bn_gamma: Array1<f64>,
    pub bn_beta: Array1<f64>,
}

/// Learnable time encoding: `t ↦ W₂·GeLU(W₁·Φ(t) + b₁) + b₂` with
/// `Φ(t) = [cos(t·w_proj), sin(t·w_proj)]/√(2F)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LteParams {
    pub w_proj: Array1<f64>,
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

/// Full parameter set, in declaration order. Gradient records reuse this
/// type so buffer shapes match parameters by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScinoParams {
    pub w_init: Array2<f64>,
    pub ln_gamma: Array1<f64>,
    pub ln_beta: Array1<f64>,
    pub layers: Vec<SpectralLayerParams>,
    pub lte: LteParams,
    pub w_f1: Array2<f64>,
    pub b_f1: Array1<f64>,
    pub w_f2: Array2<f64>,
    pub b_f2: Array1<f64>,
    pub w_f3: Array2<f64>,
    pub b_f3: Array1<f64>,
}

/// Per-parameter gradient buffers matching [`ScinoParams`] exactly.
pub type GradientRecord = ScinoParams;

impl ScinoParams {
    /// Fan-in-scaled uniform init for affine maps; standard normal for the
    /// time-projection weights.
    pub fn init(hp: &HyperParams, rng: &mut ChaCha20Rng) -> Self {
        let uniform = |rng: &mut ChaCha20Rng, rows: usize, cols: usize| {
            let bound = 1.0 / (cols as f64).sqrt();
            Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-bound..bound))
        };
        let ubias = |rng: &mut ChaCha20Rng, n: usize, fan_in: usize| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            Array1::from_shape_fn(n, |_| rng.gen_range(-bound..bound))
        };
        let (d, h, s) = (hp.d, hp.h, hp.s);
        let (f, m) = (hp.f_lte, hp.m_lte);
        let layers = (0..hp.l_layers)
            .map(|_| SpectralLayerParams {
                w_spec: uniform(rng, 2 * h, 2 * h),
                b_spec: ubias(rng, 2 * h, 2 * h),
                bn_gamma: Array1::ones(2 * h),
                bn_beta: Array1::zeros(2 * h),
            })
            .collect();
        let lte = LteParams {
            w_proj: Array1::from_shape_fn(f, |_| {
                rng.sample::<f64, _>(rand_distr::StandardNormal)
            }),
            w1: uniform(rng, m, 2 * f),
            b1: ubias(rng, m, 2 * f),
            w2: uniform(rng, h, m),
            b2: ubias(rng, h, m),
        };
        Self {
            w_init: uniform(rng, h, d),
            ln_gamma: Array1::ones(h),
            ln_beta: Array1::zeros(h),
            layers,
            lte,
            w_f1: uniform(rng, h, h),
            b_f1: ubias(rng, h, h),
            w_f2: uniform(rng, s, h),
            b_f2: ubias(rng, s, h),
            w_f3: uniform(rng, d, s),
            b_f3: ubias(rng, d, s),
        }
    }

    pub fn zeros_like(hp: &HyperParams) -> Self {
        let (d, h, s) = (hp.d, hp.h, hp.s);
        let (f, m) = (hp.f_lte, hp.m_lte);
        Self {
            w_init: Array2::zeros((h, d)),
            ln_gamma: Array1::zeros(h),
            ln_beta: Array1::zeros(h),
            layers: (0..hp.l_layers)
                .map(|_| SpectralLayerParams {
                    w_spec: Array2::zeros((2 * h, 2 * h)),
                    b_spec: Array1::zeros(2 * h),
                    bn_gamma: Array1::zeros(2 * h),
                    bn_beta: Array1::zeros(2 * h),
                })
                .collect(),
            lte: LteParams {
                w_proj: Array1::zeros(f),
                w1: Array2::zeros((m, 2 * f)),
                b1: Array1::zeros(m),
                w2: Array2::zeros((h, m)),
                b2: Array1::zeros(h),
            },
            w_f1: Array2::zeros((h, h)),
            b_f1: Array1::zeros(h),
            w_f2: Array2::zeros((s, h)),
            b_f2: Array1::zeros(s),
            w_f3: Array2::zeros((d, s)),
            b_f3: Array1::zeros(d),
        }
    }

    /// All parameter buffers as slices, in declaration order.
    pub fn buffers(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = vec![
            self.w_init.as_slice().unwrap(),
            self.ln_gamma.as_slice().unwrap(),
            self.ln_beta.as_slice().unwrap(),
        ];
        for layer in &self.layers {
            out.push(layer.w_spec.as_slice().unwrap());
            out.push(layer.b_spec.as_slice().unwrap());
            out.push(layer.bn_gamma.as_slice().unwrap());
            out.push(layer.bn_beta.as_slice().unwrap());
        }
        out.push(self.lte.w_proj.as_slice().unwrap());
        out.push(self.lte.w1.as_slice().unwrap());
        out.push(self.lte.b1.as_slice().unwrap());
        out.push(self.lte.w2.as_slice().unwrap());
        out.push(self.lte.b2.as_slice().unwrap());
        out.push(self.w_f1.as_slice().unwrap());
        out.push(self.b_f1.as_slice().unwrap());
        out.push(self.w_f2.as_slice().unwrap());
        out.push(self.b_f2.as_slice().unwrap());
        out.push(self.w_f3.as_slice().unwrap());
        out.push(self.b_f3.as_slice().unwrap());
        out
    }

    pub fn buffers_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = vec![
            self.w_init.as_slice_mut().unwrap(),
            self.ln_gamma.as_slice_mut().unwrap(),
            self.ln_beta.as_slice_mut().unwrap(),
        ];
        for layer in &mut self.layers {
            out.push(layer.w_spec.as_slice_mut().unwrap());
            out.push(layer.b_spec.as_slice_mut().unwrap());
            out.push(layer.bn_gamma.as_slice_mut().unwrap());
            out.push(layer.bn_beta.as_slice_mut().unwrap());
        }
        out.push(self.lte.w_proj.as_slice_mut().unwrap());
        out.push(self.lte.w1.as_slice_mut().unwrap());
        out.push(self.lte.b1.as_slice_mut().unwrap());
        out.push(self.lte.w2.as_slice_mut().unwrap());
        out.push(self.lte.b2.as_slice_mut().unwrap());
        out.push(self.w_f1.as_slice_mut().unwrap());
        out.push(self.b_f1.as_slice_mut().unwrap());
        out.push(self.w_f2.as_slice_mut().unwrap());
        out.push(self.b_f2.as_slice_mut().unwrap());
        out.push(self.w_f3.as_slice_mut().unwrap());
        out.push(self.b_f3.as_slice_mut().unwrap());
        out
    }

    pub fn param_count(&self) -> usize {
        self.buffers().iter().map(|b| b.len()).sum()
    }
}

/// Running statistics of the normalization layers. In train mode these are
/// updated from batch statistics; in eval mode both normalizations become
/// fixed affine maps so the network is a deterministic smooth-almost-
/// everywhere function of its input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    /// Running mean/variance of the per-sample statistics of the initial
    /// layer normalization (scalars: the normalization is over features).
    pub ln_mean: f64,
    pub ln_var: f64,
    /// Per-layer, per-channel running batch-normalization statistics (2H).
    pub bn_mean: Vec<Array1<f64>>,
    pub bn_var: Vec<Array1<f64>>,
}

impl NormStats {
    pub fn fresh(hp: &HyperParams) -> Self {
        Self {
            ln_mean: 0.0,
            ln_var: 1.0,
            bn_mean: vec![Array1::zeros(2 * hp.h); hp.l_layers],
            bn_var: vec![Array1::ones(2 * hp.h); hp.l_layers],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Train,
    Eval,
}

/// Switches used by degenerate test builds (linear network, norm layers
/// replaced by the identity). Not serialized.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TestOverrides {
    pub identity_activations: bool,
    pub identity_norms: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScinoNetwork {
    pub hp: HyperParams,
    pub params: ScinoParams,
    pub stats: NormStats,
    pub mode: Mode,
    #[serde(skip)]
    pub overrides: TestOverrides,
}

impl ScinoNetwork {
    pub fn init(hp: HyperParams, rng: &mut ChaCha20Rng) -> Result<Self> {
        hp.validate()?;
        Ok(Self {
            params: ScinoParams::init(&hp, rng),
            stats: NormStats::fresh(&hp),
            mode: Mode::Train,
            overrides: TestOverrides::default(),
            hp,
        })
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    /// Φ(t): unit-free Fourier features with ‖Φ(t)‖² = 1/2 for every t.
    pub fn time_features(&self, t: f64) -> Array1<f64> {
        let f = self.hp.f_lte;
        let scale = 1.0 / (2.0 * f as f64).sqrt();
        Array1::from_shape_fn(2 * f, |i| {
            let w = self.params.lte.w_proj[i % f];
            if i < f {
                (t * w).cos() * scale
            } else {
                (t * w).sin() * scale
            }
        })
    }

    /// The time-encoding vector injected into every spectral layer.
    pub fn lte_encode(&self, t: f64) -> Result<Array1<f64>> {
        if !t.is_finite() {
            return Err(Error::Numeric(format!("lte_encode: non-finite t = {t}")));
        }
        let phi = self.time_features(t);
        let lte = &self.params.lte;
        let mut hidden = lte.w1.dot(&phi) + &lte.b1;
        hidden.mapv_inplace(|v| gelu(v).0);
        Ok(lte.w2.dot(&hidden) + &lte.b2)
    }
}

/// GeLU (tanh approximation) and its derivative.
pub(crate) fn gelu(x: f64) -> (f64, f64) {
    const C1: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
    const C2: f64 = 0.044_715;
    let u = C1 * (x + C2 * x * x * x);
    let th = u.tanh();
    let sech2 = 1.0 - th * th;
    let du = C1 * (1.0 + 3.0 * C2 * x * x);
    let g = 0.5 * x * (1.0 + th);
    let dg = 0.5 * (1.0 + th) + 0.5 * x * sech2 * du;
    (g, dg)
}

pub(crate) fn leaky(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        LEAKY_SLOPE * x
    }
}

/// Derivative mask of LeakyReLU; the slope at exactly zero is the
/// negative-side slope.
pub(crate) fn leaky_mask(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        LEAKY_SLOPE
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn time_features_norm_is_half() {
        let hp = HyperParams::desk(3);
        let net = ScinoNetwork::init(hp, &mut substream(1, &["init"])).unwrap();
        let mut rng = substream(2, &["t"]);
        for _ in 0..1000 {
            let t: f64 = rand::Rng::gen_range(&mut rng, -5.0..5.0);
            let phi = net.time_features(t);
            let norm2: f64 = phi.iter().map(|v| v * v).sum();
            assert!((norm2 - 0.5).abs() < 1e-12, "t={t}: ||phi||^2 = {norm2}");
        }
    }

    #[test]
    fn time_features_at_zero() {
        let hp = HyperParams::desk(2);
        let net = ScinoNetwork::init(hp.clone(), &mut substream(3, &["init"])).unwrap();
        let phi = net.time_features(0.0);
        let scale = 1.0 / (2.0 * hp.f_lte as f64).sqrt();
        for i in 0..hp.f_lte {
            assert_eq!(phi[i], scale); // cos 0 = 1
            assert_eq!(phi[hp.f_lte + i], 0.0); // sin 0 = 0
        }
    }

    #[test]
    fn lte_encode_matches_direct_evaluation() {
        let hp = HyperParams::desk(2);
        let net = ScinoNetwork::init(hp.clone(), &mut substream(4, &["init"])).unwrap();
        let t = 0.37;
        let out = net.lte_encode(t).unwrap();
        // independent re-evaluation, scalar arithmetic only
        let lte = &net.params.lte;
        for r in 0..hp.h {
            let mut acc = lte.b2[r];
            for m in 0..hp.m_lte {
                let mut pre = lte.b1[m];
                for c in 0..2 * hp.f_lte {
                    let w = lte.w_proj[c % hp.f_lte];
                    let phi = if c < hp.f_lte { (t * w).cos() } else { (t * w).sin() }
                        / (2.0 * hp.f_lte as f64).sqrt();
                    pre += lte.w1[[m, c]] * phi;
                }
                acc += lte.w2[[r, m]] * gelu(pre).0;
            }
            assert!((out[r] - acc).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_record_shapes_match_parameters() {
        let hp = HyperParams::desk(4);
        let params = ScinoParams::init(&hp, &mut substream(5, &["init"]));
        let grads = ScinoParams::zeros_like(&hp);
        let pb = params.buffers();
        let gb = grads.buffers();
        assert_eq!(pb.len(), gb.len());
        for (p, g) in pb.iter().zip(gb) {
            assert_eq!(p.len(), g.len());
        }
    }

    #[test]
    fn rejects_bad_hyperparams() {
        let mut hp = HyperParams::desk(2);
        hp.dropout_rate = 1.0;
        assert!(hp.validate().is_err());
        let mut hp2 = HyperParams::desk(2);
        hp2.l_layers = 0;
        assert!(hp2.validate().is_err());
    }
}
