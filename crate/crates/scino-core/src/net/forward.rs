//! Batched forward passes and the hand-rolled reverse pass.
//!
//! The train-mode forward records every intermediate needed to replay the
//! computation backward once per batch; nothing is shared across batches.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use super::batchfft::{fft_rows, fft_rows_adjoint, ifft_real_rows_adjoint, ifft_rows_real};
use super::{gelu, leaky, leaky_mask, GradientRecord, Mode, ScinoNetwork, ScinoParams, NORM_EPS, NORM_MOMENTUM};

/// Recording of one train-mode forward pass.
pub struct TrainTape {
    x: Array2<f64>,
    t: Array1<f64>,
    mask0: Array2<f64>,
    ln_xhat: Array2<f64>,
    ln_inv_std: Array1<f64>,
    dropout_mask: Array2<f64>,
    // time encoding intermediates
    phi: Array2<f64>,
    lte_pre: Array2<f64>,
    lte_hidden: Array2<f64>,
    encoding: Array2<f64>,
    layers: Vec<LayerTape>,
    x_final: Array2<f64>,
    h1: Array2<f64>,
    mask_f1: Array2<f64>,
    h2: Array2<f64>,
    mask_f2: Array2<f64>,
}

struct LayerTape {
    spec_re: Array2<f64>,
    spec_im: Array2<f64>,
    chi: Array2<f64>,
    mask: Array2<f64>,
    bn_xhat: Array2<f64>,
    bn_inv_std: Array1<f64>,
}

fn check_finite(name: &str, m: &Array2<f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric(format!("non-finite activation in {name}")))
    }
}

impl ScinoNetwork {
    fn act(&self, x: f64) -> f64 {
        if self.overrides.identity_activations {
            x
        } else {
            leaky(x)
        }
    }

    fn act_mask(&self, x: f64) -> f64 {
        if self.overrides.identity_activations {
            1.0
        } else {
            leaky_mask(x)
        }
    }

    /// Batched time encoding with intermediates kept for the reverse pass.
    fn lte_batch(&self, t: &Array1<f64>) -> (Array2<f64>, Array2<f64>, Array2<f64>, Array2<f64>) {
        let f = self.hp.f_lte;
        let scale = 1.0 / (2.0 * f as f64).sqrt();
        let lte = &self.params.lte;
        let b = t.len();
        let phi = Array2::from_shape_fn((b, 2 * f), |(i, c)| {
            let w = lte.w_proj[c % f];
            if c < f {
                (t[i] * w).cos() * scale
            } else {
                (t[i] * w).sin() * scale
            }
        });
        let pre = phi.dot(&lte.w1.t()) + &lte.b1;
        let hidden = pre.mapv(|v| gelu(v).0);
        let enc = hidden.dot(&lte.w2.t()) + &lte.b2;
        (phi, pre, hidden, enc)
    }

    /// Train-mode forward: applies dropout, uses batch statistics in the
    /// normalization layers and updates their running counterparts.
    pub fn forward_train(
        &mut self,
        x: &Array2<f64>,
        t: &Array1<f64>,
        rng: &mut ChaCha20Rng,
    ) -> Result<(Array2<f64>, TrainTape)> {
        if self.mode != Mode::Train {
            return Err(Error::Config("forward_train requires train mode".into()));
        }
        let b = x.nrows();
        if b < 2 && !self.overrides.identity_norms {
            return Err(Error::Config(
                "batch normalization needs at least 2 samples per batch".into(),
            ));
        }
        if x.ncols() != self.hp.d {
            return Err(Error::Data(format!(
                "input has {} columns, network expects {}",
                x.ncols(),
                self.hp.d
            )));
        }
        let h = self.hp.h;

        let (phi, lte_pre, lte_hidden, encoding) = self.lte_batch(t);

        // initial lift
        let a0 = x.dot(&self.params.w_init.t());
        let mask0 = a0.mapv(|v| self.act_mask(v));
        let r0 = a0.mapv(|v| self.act(v));

        // layer normalization over features, with running-stat tracking
        let (ln_out, ln_xhat, ln_inv_std) = if self.overrides.identity_norms {
            (r0.clone(), r0.clone(), Array1::ones(b))
        } else {
            let mut xhat = Array2::zeros((b, h));
            let mut inv_std = Array1::zeros(b);
            let mut mean_of_means = 0.0;
            let mut mean_of_vars = 0.0;
            for (i, row) in r0.outer_iter().enumerate() {
                let mu = row.sum() / h as f64;
                let var = row.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / h as f64;
                let is = 1.0 / (var + NORM_EPS).sqrt();
                inv_std[i] = is;
                for j in 0..h {
                    xhat[[i, j]] = (row[j] - mu) * is;
                }
                mean_of_means += mu / b as f64;
                mean_of_vars += var / b as f64;
            }
            self.stats.ln_mean = (1.0 - NORM_MOMENTUM) * self.stats.ln_mean + NORM_MOMENTUM * mean_of_means;
            self.stats.ln_var = (1.0 - NORM_MOMENTUM) * self.stats.ln_var + NORM_MOMENTUM * mean_of_vars;
            let out = &xhat * &self.params.ln_gamma + &self.params.ln_beta;
            (out, xhat, inv_std)
        };

        // inverted dropout
        let p = self.hp.dropout_rate;
        let dropout_mask = if p > 0.0 {
            let keep = 1.0 - p;
            Array2::from_shape_fn((b, h), |_| {
                if rng.gen::<f64>() < keep {
                    1.0 / keep
                } else {
                    0.0
                }
            })
        } else {
            Array2::ones((b, h))
        };
        let mut xl = &ln_out * &dropout_mask;
        check_finite("mlp_init", &xl)?;

        let mut layers = Vec::with_capacity(self.hp.l_layers);
        for (li, layer) in self.params.layers.iter().enumerate() {
            let (spec_re, spec_im) = fft_rows(&xl);
            let xi_re = &spec_re * &encoding;
            let xi_im = &spec_im * &encoding;
            let mut chi = Array2::zeros((b, 2 * h));
            chi.slice_mut(ndarray::s![.., ..h]).assign(&xi_re);
            chi.slice_mut(ndarray::s![.., h..]).assign(&xi_im);

            let a = chi.dot(&layer.w_spec.t()) + &layer.b_spec;
            let mask = a.mapv(|v| self.act_mask(v));
            let r = a.mapv(|v| self.act(v));

            let (bn_out, bn_xhat, bn_inv_std) = if self.overrides.identity_norms {
                (r.clone(), r.clone(), Array1::ones(2 * h))
            } else {
                let mu = r.mean_axis(Axis(0)).expect("non-empty batch");
                let var = r
                    .axis_iter(Axis(1))
                    .zip(mu.iter())
                    .map(|(col, &m)| col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / b as f64)
                    .collect::<Array1<f64>>();
                let inv_std = var.mapv(|v| 1.0 / (v + NORM_EPS).sqrt());
                let xhat = (&r - &mu) * &inv_std;
                // running stats use the unbiased variance, batch stats the biased one
                let unbias = b as f64 / (b as f64 - 1.0);
                let rm = &mut self.stats.bn_mean[li];
                let rv = &mut self.stats.bn_var[li];
                *rm = rm.mapv(|v| v * (1.0 - NORM_MOMENTUM)) + mu.mapv(|v| v * NORM_MOMENTUM);
                *rv = rv.mapv(|v| v * (1.0 - NORM_MOMENTUM)) + var.mapv(|v| v * NORM_MOMENTUM * unbias);
                let out = &xhat * &layer.bn_gamma + &layer.bn_beta;
                (out, xhat, inv_std)
            };

            let z_re = bn_out.slice(ndarray::s![.., ..h]).to_owned();
            let z_im = bn_out.slice(ndarray::s![.., h..]).to_owned();
            let y = ifft_rows_real(&z_re, &z_im);
            xl = &xl + &y;
            check_finite(&format!("fourier_layer_{li}"), &xl)?;

            layers.push(LayerTape {
                spec_re,
                spec_im,
                chi,
                mask,
                bn_xhat,
                bn_inv_std,
            });
        }

        let x_final = xl;
        let z1 = x_final.dot(&self.params.w_f1.t()) + &self.params.b_f1;
        let mask_f1 = z1.mapv(|v| self.act_mask(v));
        let h1 = z1.mapv(|v| self.act(v));
        let z2 = h1.dot(&self.params.w_f2.t()) + &self.params.b_f2;
        let mask_f2 = z2.mapv(|v| self.act_mask(v));
        let h2 = z2.mapv(|v| self.act(v));
        let out = h2.dot(&self.params.w_f3.t()) + &self.params.b_f3;
        check_finite("mlp_final", &out)?;

        let tape = TrainTape {
            x: x.clone(),
            t: t.clone(),
            mask0,
            ln_xhat,
            ln_inv_std,
            dropout_mask,
            phi,
            lte_pre,
            lte_hidden,
            encoding,
            layers,
            x_final,
            h1,
            mask_f1,
            h2,
            mask_f2,
        };
        Ok((out, tape))
    }

    /// Eval-mode forward: dropout off, normalizations frozen to affine maps
    /// built from the running statistics. Deterministic in (t, x).
    pub fn forward_eval(&self, x: &Array2<f64>, t: f64) -> Result<Array2<f64>> {
        if self.mode != Mode::Eval {
            return Err(Error::Config("forward_eval requires eval mode".into()));
        }
        if x.ncols() != self.hp.d {
            return Err(Error::Data(format!(
                "input has {} columns, network expects {}",
                x.ncols(),
                self.hp.d
            )));
        }
        let h = self.hp.h;
        let encoding = self.lte_encode(t)?;

        let a0 = x.dot(&self.params.w_init.t());
        let r0 = a0.mapv(|v| self.act(v));
        let mut xl = if self.overrides.identity_norms {
            r0
        } else {
            let is = 1.0 / (self.stats.ln_var + NORM_EPS).sqrt();
            (r0.mapv(|v| (v - self.stats.ln_mean) * is)) * &self.params.ln_gamma
                + &self.params.ln_beta
        };
        check_finite("mlp_init", &xl)?;

        for (li, layer) in self.params.layers.iter().enumerate() {
            let (spec_re, spec_im) = fft_rows(&xl);
            let xi_re = &spec_re * &encoding;
            let xi_im = &spec_im * &encoding;
            let b = x.nrows();
            let mut chi = Array2::zeros((b, 2 * h));
            chi.slice_mut(ndarray::s![.., ..h]).assign(&xi_re);
            chi.slice_mut(ndarray::s![.., h..]).assign(&xi_im);
            let a = chi.dot(&layer.w_spec.t()) + &layer.b_spec;
            let r = a.mapv(|v| self.act(v));
            let bn_out = if self.overrides.identity_norms {
                r
            } else {
                let inv_std = self.stats.bn_var[li].mapv(|v| 1.0 / (v + NORM_EPS).sqrt());
                (&r - &self.stats.bn_mean[li]) * &inv_std * &layer.bn_gamma + &layer.bn_beta
            };
            let z_re = bn_out.slice(ndarray::s![.., ..h]).to_owned();
            let z_im = bn_out.slice(ndarray::s![.., h..]).to_owned();
            let y = ifft_rows_real(&z_re, &z_im);
            xl = &xl + &y;
            check_finite(&format!("fourier_layer_{li}"), &xl)?;
        }

        let h1 = (xl.dot(&self.params.w_f1.t()) + &self.params.b_f1).mapv(|v| self.act(v));
        let h2 = (h1.dot(&self.params.w_f2.t()) + &self.params.b_f2).mapv(|v| self.act(v));
        let out = h2.dot(&self.params.w_f3.t()) + &self.params.b_f3;
        check_finite("mlp_final", &out)?;
        Ok(out)
    }

    /// Reverse pass over a recorded forward. `d_out` is ∂loss/∂output.
    pub fn backward(&self, tape: &TrainTape, d_out: &Array2<f64>) -> GradientRecord {
        let h = self.hp.h;
        let nb = tape.x.nrows();
        let mut g = ScinoParams::zeros_like(&self.hp);

        // final readout
        g.w_f3 = d_out.t().dot(&tape.h2);
        g.b_f3 = d_out.sum_axis(Axis(0));
        let dh2 = d_out.dot(&self.params.w_f3);
        let da2 = &dh2 * &tape.mask_f2;
        g.w_f2 = da2.t().dot(&tape.h1);
        g.b_f2 = da2.sum_axis(Axis(0));
        let dh1 = da2.dot(&self.params.w_f2);
        let da1 = &dh1 * &tape.mask_f1;
        g.w_f1 = da1.t().dot(&tape.x_final);
        g.b_f1 = da1.sum_axis(Axis(0));
        let mut dx = da1.dot(&self.params.w_f1);

        let mut d_encoding: Array2<f64> = Array2::zeros(tape.encoding.raw_dim());

        for (li, layer_tape) in tape.layers.iter().enumerate().rev() {
            let layer = &self.params.layers[li];
            // skip connection: dx is the cotangent of x_{l+1}; the spectral
            // branch adds its own contribution to x_l below.
            let (dz_re, dz_im) = ifft_real_rows_adjoint(&dx);
            let mut dbn = Array2::zeros((dx.nrows(), 2 * h));
            dbn.slice_mut(ndarray::s![.., ..h]).assign(&dz_re);
            dbn.slice_mut(ndarray::s![.., h..]).assign(&dz_im);

            let dr = if self.overrides.identity_norms {
                dbn
            } else {
                let gl = &mut g.layers[li];
                gl.bn_gamma = (&dbn * &layer_tape.bn_xhat).sum_axis(Axis(0));
                gl.bn_beta = dbn.sum_axis(Axis(0));
                let dxhat = &dbn * &layer.bn_gamma;
                let mean_dxhat = dxhat.mean_axis(Axis(0)).expect("non-empty");
                let mean_dxhat_xhat = (&dxhat * &layer_tape.bn_xhat)
                    .mean_axis(Axis(0))
                    .expect("non-empty");
                ((&dxhat - &mean_dxhat) - &layer_tape.bn_xhat * &mean_dxhat_xhat)
                    * &layer_tape.bn_inv_std
            };

            let da = &dr * &layer_tape.mask;
            g.layers[li].w_spec = da.t().dot(&layer_tape.chi);
            g.layers[li].b_spec = da.sum_axis(Axis(0));
            let dchi = da.dot(&layer.w_spec);

            let dxi_re = dchi.slice(ndarray::s![.., ..h]).to_owned();
            let dxi_im = dchi.slice(ndarray::s![.., h..]).to_owned();
            d_encoding += &(&dxi_re * &layer_tape.spec_re);
            d_encoding += &(&dxi_im * &layer_tape.spec_im);
            let dspec_re = &dxi_re * &tape.encoding;
            let dspec_im = &dxi_im * &tape.encoding;
            dx += &fft_rows_adjoint(&dspec_re, &dspec_im);
        }

        // time encoding
        let lte = &self.params.lte;
        g.lte.w2 = d_encoding.t().dot(&tape.lte_hidden);
        g.lte.b2 = d_encoding.sum_axis(Axis(0));
        let dg_hidden = d_encoding.dot(&lte.w2);
        let dpre = &dg_hidden * &tape.lte_pre.mapv(|v| gelu(v).1);
        g.lte.w1 = dpre.t().dot(&tape.phi);
        g.lte.b1 = dpre.sum_axis(Axis(0));
        let dphi = dpre.dot(&lte.w1);
        let f = self.hp.f_lte;
        let scale = 1.0 / (2.0 * f as f64).sqrt();
        for fi in 0..f {
            let w = lte.w_proj[fi];
            let mut acc = 0.0;
            for bi in 0..tape.t.len() {
                let t = tape.t[bi];
                acc += t * scale
                    * (-(t * w).sin() * dphi[[bi, fi]] + (t * w).cos() * dphi[[bi, f + fi]]);
            }
            g.lte.w_proj[fi] = acc;
        }

        // dropout, layer norm, initial lift
        let d_ln = &dx * &tape.dropout_mask;
        let dr0 = if self.overrides.identity_norms {
            d_ln
        } else {
            g.ln_gamma = (&d_ln * &tape.ln_xhat).sum_axis(Axis(0));
            g.ln_beta = d_ln.sum_axis(Axis(0));
            let dxhat = &d_ln * &self.params.ln_gamma;
            let hf = h as f64;
            let mut dr0 = Array2::zeros((nb, h));
            for i in 0..nb {
                let row = dxhat.row(i);
                let xrow = tape.ln_xhat.row(i);
                let mean_d = row.sum() / hf;
                let mean_dx = row.iter().zip(xrow.iter()).map(|(a, b)| a * b).sum::<f64>() / hf;
                for j in 0..h {
                    dr0[[i, j]] = tape.ln_inv_std[i] * (row[j] - mean_d - xrow[j] * mean_dx);
                }
            }
            dr0
        };
        let da0 = &dr0 * &tape.mask0;
        g.w_init = da0.t().dot(&tape.x);
        g
    }
}

/// Gradients of a scalar loss of the network outputs with respect to every
/// parameter, for one batch. `loss` maps the batched output to its value
/// and its cotangent ∂loss/∂output; batching and any mean over the batch
/// are the caller's concern and must be folded into the cotangent.
pub fn param_gradient<F>(
    net: &mut ScinoNetwork,
    x: &Array2<f64>,
    t: &Array1<f64>,
    rng: &mut ChaCha20Rng,
    loss: F,
) -> Result<(f64, GradientRecord)>
where
    F: FnOnce(&Array2<f64>) -> (f64, Array2<f64>),
{
    let (out, tape) = net.forward_train(x, t, rng)?;
    let (value, d_out) = loss(&out);
    if !value.is_finite() {
        return Err(Error::Numeric(format!("non-finite loss value {value}")));
    }
    Ok((value, net.backward(&tape, &d_out)))
}
