//! Hyper-dual evaluation of the eval-mode network.
//!
//! One pass propagates four slots (value, two directional first
//! derivatives, the mixed second derivative) through the frozen network.
//! Affine maps act on each slot independently; LeakyReLU is piecewise
//! linear so its second derivative vanishes and the slots just share the
//! activation mask. The batched path keeps the slots as matrices so the
//! affine maps stay GEMMs; a scalar path over `HyperDual` values backs it
//! as an independent reference.

use ndarray::{Array1, Array2};

use crate::diffcore::{fft_forward, fft_inverse, ComplexSignal, HyperDual};
use crate::error::{Error, Result};
use super::batchfft::{fft_rows, ifft_rows, ifft_rows_real};
use super::{Mode, ScinoNetwork, NORM_EPS};

/// Batched hyper-dual state: four parallel matrices of identical shape.
#[derive(Debug, Clone)]
pub struct Hd4 {
    pub v: Array2<f64>,
    pub da: Array2<f64>,
    pub db: Array2<f64>,
    pub dab: Array2<f64>,
}

impl Hd4 {
    /// Seed a batch of inputs along coordinates `dir_a` and `dir_b`.
    pub fn seed(x: &Array2<f64>, dir_a: usize, dir_b: usize) -> Self {
        let (b, d) = x.dim();
        let mut da = Array2::zeros((b, d));
        let mut db = Array2::zeros((b, d));
        da.column_mut(dir_a).fill(1.0);
        db.column_mut(dir_b).fill(1.0);
        Self {
            v: x.clone(),
            da,
            db,
            dab: Array2::zeros((b, d)),
        }
    }

    /// Affine map `y = x·Wᵀ (+ bias on the value slot)`.
    fn affine(&self, w: &Array2<f64>, bias: Option<&Array1<f64>>) -> Self {
        let mut v = self.v.dot(&w.t());
        if let Some(b) = bias {
            v += b;
        }
        Self {
            v,
            da: self.da.dot(&w.t()),
            db: self.db.dot(&w.t()),
            dab: self.dab.dot(&w.t()),
        }
    }

    /// Elementwise scale by a constant vector (broadcast over rows) plus a
    /// shift on the value slot.
    fn scale_shift(&self, scale: &Array1<f64>, shift: Option<&Array1<f64>>) -> Self {
        let mut v = &self.v * scale;
        if let Some(s) = shift {
            v += s;
        }
        Self {
            v,
            da: &self.da * scale,
            db: &self.db * scale,
            dab: &self.dab * scale,
        }
    }

    /// LeakyReLU: piecewise linear, so every slot is masked identically and
    /// no second-order term appears.
    fn leaky(&self, identity: bool) -> Self {
        if identity {
            return self.clone();
        }
        let mask = self.v.mapv(super::leaky_mask);
        Self {
            v: &self.v * &mask,
            da: &self.da * &mask,
            db: &self.db * &mask,
            dab: &self.dab * &mask,
        }
    }

    fn add(&self, rhs: &Self) -> Self {
        Self {
            v: &self.v + &rhs.v,
            da: &self.da + &rhs.da,
            db: &self.db + &rhs.db,
            dab: &self.dab + &rhs.dab,
        }
    }
}

impl ScinoNetwork {
    /// Hyper-dual forward over the batch `x` at time `t`: value, first
    /// derivatives along `e_dir_a`, `e_dir_b`, and the mixed second
    /// derivative of every output coordinate. `dir_a == dir_b` yields pure
    /// second derivatives in the mixed slot. Time is a constant here.
    pub fn forward_hyperdual(
        &self,
        x: &Array2<f64>,
        t: f64,
        dir_a: usize,
        dir_b: usize,
    ) -> Result<Hd4> {
        if self.mode != Mode::Eval {
            return Err(Error::Config("forward_hyperdual requires eval mode".into()));
        }
        if dir_a >= self.hp.d || dir_b >= self.hp.d {
            return Err(Error::Config(format!(
                "directions ({dir_a},{dir_b}) out of range for d={}",
                self.hp.d
            )));
        }
        let h = self.hp.h;
        let identity_act = self.overrides.identity_activations;
        let encoding = self.lte_encode(t)?;

        let mut state = Hd4::seed(x, dir_a, dir_b)
            .affine(&self.params.w_init, None)
            .leaky(identity_act);
        if !self.overrides.identity_norms {
            let is = 1.0 / (self.stats.ln_var + NORM_EPS).sqrt();
            let scale = self.params.ln_gamma.mapv(|g| g * is);
            let shift = &self.params.ln_beta
                - &self.params.ln_gamma.mapv(|g| g * is * self.stats.ln_mean);
            state = state.scale_shift(&scale, Some(&shift));
        }

        for (li, layer) in self.params.layers.iter().enumerate() {
            let skip = state.clone();
            // FFT is linear: transform each slot independently, then scale
            // both complex parts by the (constant) time encoding.
            let specs: Vec<(Array2<f64>, Array2<f64>)> = [&state.v, &state.da, &state.db, &state.dab]
                .iter()
                .map(|m| {
                    let (re, im) = fft_rows(m);
                    (re * &encoding, im * &encoding)
                })
                .collect();
            let b = x.nrows();
            let mut chi = Hd4 {
                v: Array2::zeros((b, 2 * h)),
                da: Array2::zeros((b, 2 * h)),
                db: Array2::zeros((b, 2 * h)),
                dab: Array2::zeros((b, 2 * h)),
            };
            for (slot, (re, im)) in [&mut chi.v, &mut chi.da, &mut chi.db, &mut chi.dab]
                .into_iter()
                .zip(&specs)
            {
                slot.slice_mut(ndarray::s![.., ..h]).assign(re);
                slot.slice_mut(ndarray::s![.., h..]).assign(im);
            }

            let mut z = chi
                .affine(&layer.w_spec, Some(&layer.b_spec))
                .leaky(identity_act);
            if !self.overrides.identity_norms {
                let inv_std = self.stats.bn_var[li].mapv(|v| 1.0 / (v + NORM_EPS).sqrt());
                let scale = &layer.bn_gamma * &inv_std;
                let shift = &layer.bn_beta - &(&scale * &self.stats.bn_mean[li]);
                z = z.scale_shift(&scale, Some(&shift));
            }

            // back to the spatial domain, real part only, per slot
            let mut spatial = Vec::with_capacity(4);
            for slot in [&z.v, &z.da, &z.db, &z.dab] {
                let re = slot.slice(ndarray::s![.., ..h]).to_owned();
                let im = slot.slice(ndarray::s![.., h..]).to_owned();
                spatial.push(ifft_rows_real(&re, &im));
            }
            let branch = Hd4 {
                dab: spatial.pop().unwrap(),
                db: spatial.pop().unwrap(),
                da: spatial.pop().unwrap(),
                v: spatial.pop().unwrap(),
            };
            state = skip.add(&branch);
        }

        let out = state
            .affine(&self.params.w_f1, Some(&self.params.b_f1))
            .leaky(identity_act)
            .affine(&self.params.w_f2, Some(&self.params.b_f2))
            .leaky(identity_act)
            .affine(&self.params.w_f3, Some(&self.params.b_f3));
        if !out.v.iter().all(|v| v.is_finite())
            || !out.dab.iter().all(|v| v.is_finite())
        {
            return Err(Error::Numeric(
                "non-finite hyper-dual output (division or overflow inside forward)".into(),
            ));
        }
        Ok(out)
    }

    /// Scalar reference path: the same evaluation over `HyperDual` values,
    /// including the FFT as a linear map on hyper-duals. Slower; used to
    /// cross-check the batched implementation.
    pub fn forward_hyperdual_scalar(
        &self,
        x: &[f64],
        t: f64,
        dir_a: usize,
        dir_b: usize,
    ) -> Result<Vec<HyperDual<f64>>> {
        if self.mode != Mode::Eval {
            return Err(Error::Config("forward_hyperdual requires eval mode".into()));
        }
        type Hd = HyperDual<f64>;
        let identity_act = self.overrides.identity_activations;
        let act = |v: Hd| {
            if identity_act {
                v
            } else {
                v.leaky_relu(super::LEAKY_SLOPE)
            }
        };
        let h = self.hp.h;
        let encoding = self.lte_encode(t)?;

        let affine = |w: &Array2<f64>, b: Option<&Array1<f64>>, input: &[Hd]| -> Vec<Hd> {
            (0..w.nrows())
                .map(|r| {
                    let mut acc = b.map_or(Hd::constant(0.0), |b| Hd::constant(b[r]));
                    for (c, &xi) in input.iter().enumerate() {
                        acc = acc + xi.lin_scale_by(w[[r, c]]);
                    }
                    acc
                })
                .collect()
        };

        let seeded = HyperDual::seed_vector(x, dir_a, dir_b);
        let mut state: Vec<Hd> = affine(&self.params.w_init, None, &seeded)
            .into_iter()
            .map(act)
            .collect();
        if !self.overrides.identity_norms {
            let is = 1.0 / (self.stats.ln_var + NORM_EPS).sqrt();
            state = state
                .iter()
                .enumerate()
                .map(|(j, &v)| {
                    (v - Hd::constant(self.stats.ln_mean)).lin_scale_by(is * self.params.ln_gamma[j])
                        + Hd::constant(self.params.ln_beta[j])
                })
                .collect();
        }

        for (li, layer) in self.params.layers.iter().enumerate() {
            let spec = fft_forward(&state)?;
            let chi: Vec<Hd> = spec
                .real
                .iter()
                .chain(spec.imag.iter())
                .enumerate()
                .map(|(c, &v)| v.lin_scale_by(encoding[c % h]))
                .collect();
            let mut z: Vec<Hd> = affine(&layer.w_spec, Some(&layer.b_spec), &chi)
                .into_iter()
                .map(act)
                .collect();
            if !self.overrides.identity_norms {
                z = z
                    .iter()
                    .enumerate()
                    .map(|(c, &v)| {
                        let is = 1.0 / (self.stats.bn_var[li][c] + NORM_EPS).sqrt();
                        (v - Hd::constant(self.stats.bn_mean[li][c]))
                            .lin_scale_by(is * layer.bn_gamma[c])
                            + Hd::constant(layer.bn_beta[c])
                    })
                    .collect();
            }
            let zeta = ComplexSignal {
                real: z[..h].to_vec(),
                imag: z[h..].to_vec(),
            };
            let spatial = fft_inverse(&zeta)?;
            state = state
                .iter()
                .zip(&spatial.real)
                .map(|(&s, &y)| s + y)
                .collect();
        }

        let h1: Vec<Hd> = affine(&self.params.w_f1, Some(&self.params.b_f1), &state)
            .into_iter()
            .map(act)
            .collect();
        let h2: Vec<Hd> = affine(&self.params.w_f2, Some(&self.params.b_f2), &h1)
            .into_iter()
            .map(act)
            .collect();
        Ok(affine(&self.params.w_f3, Some(&self.params.b_f3), &h2))
    }
}

trait ScaleBy {
    fn lin_scale_by(self, k: f64) -> Self;
}

impl ScaleBy for HyperDual<f64> {
    fn lin_scale_by(self, k: f64) -> Self {
        HyperDual::new(self.v * k, self.da * k, self.db * k, self.dab * k)
    }
}
