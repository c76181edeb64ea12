//! Synthetic data generation: Erdős–Rényi DAGs, Gaussian-process and linear
//! additive noise models, and the seven-node water-evaporation system.

mod io;

pub use io::{load_csv, load_graph_json, save_csv, save_graph_json};

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::seq::SliceRandom;
use rand_distr::StandardNormal;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::rng::substream;

/// Configuration for random-graph sampling.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct GenConfig {
    /// Number of nodes.
    pub d: usize,
    /// Expected edge count; the per-pair probability is
    /// `min(1, expected_edges / C(d,2))`.
    pub expected_edges: f64,
    /// Number of samples.
    pub n: usize,
    /// Noise standard deviation.
    pub noise_std: f64,
    pub seed: u64,
}

impl GenConfig {
    pub fn new(d: usize, n: usize, seed: u64) -> Self {
        Self {
            d,
            expected_edges: 4.0 * d as f64,
            n,
            noise_std: 1.0,
            seed,
        }
    }

    pub fn edge_probability(&self) -> f64 {
        let pairs = (self.d * (self.d - 1) / 2) as f64;
        (self.expected_edges / pairs).min(1.0)
    }
}

fn node_names(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("x{i}")).collect()
}

/// Erdős–Rényi DAG: draw a uniform random node permutation, then include
/// each forward pair independently with probability `p`. Acyclic by
/// construction.
pub fn gen_er_dag(cfg: &GenConfig) -> Result<Dag> {
    if cfg.d < 2 {
        return Err(Error::Config("gen_er_dag requires at least 2 nodes".into()));
    }
    let mut rng = substream(cfg.seed, &["er-dag"]);
    let mut perm: Vec<usize> = (0..cfg.d).collect();
    perm.shuffle(&mut rng);
    let p = cfg.edge_probability();
    let mut edges = Vec::new();
    for a in 0..cfg.d {
        for b in a + 1..cfg.d {
            if rng.gen::<f64>() < p {
                edges.push((perm[a], perm[b]));
            }
        }
    }
    Dag::new(node_names(cfg.d), &edges)
}

/// RBF Gram matrix with fixed bandwidth 1 over rows of `points`.
fn rbf_gram(points: &Array2<f64>) -> Vec<f64> {
    let n = points.nrows();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sq = 0.0;
            for c in 0..points.ncols() {
                let diff = points[[i, c]] - points[[j, c]];
                sq += diff * diff;
            }
            let v = (-0.5 * sq).exp();
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

/// Lower Cholesky factor of `K + jitter·I`, retrying once with a larger
/// jitter before giving up.
fn gp_chol(gram: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    let mut last_err = None;
    for jitter in [1e-8, 1e-6] {
        let mut k = gram.clone();
        for i in 0..n {
            k[i * n + i] += jitter;
        }
        match chol_factor(&mut k, n) {
            Ok(()) => return Ok(k),
            Err(e) => last_err = Some((jitter, e)),
        }
    }
    let (jitter, e) = last_err.expect("jitter list is non-empty");
    Err(Error::Numeric(format!(
        "GP Gram Cholesky failed even with jitter {jitter:e}: {e}"
    )))
}

fn chol_factor(a: &mut [f64], n: usize) -> std::result::Result<(), crate::diffcore::CholeskyError> {
    // In-place lower factor; reuse the solver's algebra via a small local
    // implementation to avoid materializing a second matrix.
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= a[i * n + k] * a[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(crate::diffcore::CholeskyError { pivot: i });
                }
                a[i * n + i] = sum.sqrt();
            } else {
                a[i * n + j] = sum / a[j * n + j];
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            a[i * n + j] = 0.0;
        }
    }
    Ok(())
}

/// Nonlinear ANM: every non-root node is a joint Gaussian-process draw
/// (RBF kernel, bandwidth 1) over its realized parent rows, plus Gaussian
/// noise. Roots are pure noise.
pub fn sample_gp_anm(dag: &Dag, cfg: &GenConfig) -> Result<Dataset> {
    let d = dag.n_nodes();
    let n = cfg.n;
    let order = dag
        .topological_order()
        .ok_or_else(|| Error::Data("sample_gp_anm requires an acyclic graph".into()))?;
    let mut data = Array2::zeros((n, d));
    for &node in &order {
        let mut rng = substream(cfg.seed, &["gp-anm", &node.to_string()]);
        let noise: Array1<f64> =
            Array1::from_iter((0..n).map(|_| cfg.noise_std * rng.sample::<f64, _>(StandardNormal)));
        let parents = dag.parents(node);
        if parents.is_empty() {
            data.column_mut(node).assign(&noise);
            continue;
        }
        let mut parent_mat = Array2::zeros((n, parents.len()));
        for (pi, &p) in parents.iter().enumerate() {
            parent_mat.column_mut(pi).assign(&data.column(p));
        }
        let l = gp_chol(rbf_gram(&parent_mat), n)?;
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        // f = L z is a draw from N(0, K): identical parent rows get equal
        // kernel columns and therefore equal function values.
        for i in 0..n {
            let mut f = 0.0;
            for k in 0..=i {
                f += l[i * n + k] * z[k];
            }
            data[[i, node]] = f + noise[i];
        }
    }
    Dataset::new(dag.names().to_vec(), data)
}

/// Linear ANM with sign-symmetric weights `±U(weight_low, weight_high)`.
pub fn sample_linear_anm(
    dag: &Dag,
    weight_low: f64,
    weight_high: f64,
    cfg: &GenConfig,
) -> Result<Dataset> {
    let d = dag.n_nodes();
    let order = dag
        .topological_order()
        .ok_or_else(|| Error::Data("sample_linear_anm requires an acyclic graph".into()))?;
    let mut wrng = substream(cfg.seed, &["linear-anm", "weights"]);
    let mut weights = vec![vec![0.0; d]; d];
    for (i, j) in dag.edges() {
        let mag = wrng.gen_range(weight_low..=weight_high);
        let sign = if wrng.gen::<bool>() { 1.0 } else { -1.0 };
        weights[i][j] = sign * mag;
    }
    let mut data = Array2::zeros((cfg.n, d));
    for &node in &order {
        let mut rng = substream(cfg.seed, &["linear-anm", &node.to_string()]);
        for i in 0..cfg.n {
            let mut v = cfg.noise_std * rng.sample::<f64, _>(StandardNormal);
            for &p in &dag.parents(node) {
                v += weights[p][node] * data[[i, p]];
            }
            data[[i, node]] = v;
        }
    }
    Dataset::new(dag.names().to_vec(), data)
}

/// The 7-node water-evaporation system. Nodes: total solar irradiance,
/// surface air temperature, wind speed, evaporation rate, rainfall,
/// moisture content, object weight.
pub const PHYSICS_NODES: [&str; 7] = ["TSI", "SAT", "WS", "ER", "RNFL", "MC", "Wgt"];

/// Edge list of the water-evaporation DAG (indices into [`PHYSICS_NODES`]).
pub const PHYSICS_EDGES: [(usize, usize); 10] = [
    (0, 1), // TSI -> SAT
    (0, 3), // TSI -> ER
    (0, 2), // TSI -> WS
    (1, 3), // SAT -> ER
    (2, 1), // WS -> SAT
    (2, 3), // WS -> ER
    (3, 4), // ER -> RNFL
    (3, 5), // ER -> MC
    (4, 5), // RNFL -> MC
    (5, 6), // MC -> Wgt
];

/// Nonlinear SEM over the water-evaporation DAG:
/// `x = 2·sin(Aᵀ(x + 0.5·1)) + Aᵀ(x + 0.5·1) + z`, evaluated node by node
/// in topological order, with edge weights `±U(0.1, 1)`.
pub fn gen_physics(n: usize, seed: u64) -> Result<(Dag, Dataset)> {
    let names: Vec<String> = PHYSICS_NODES.iter().map(|s| s.to_string()).collect();
    let dag = Dag::new(names.clone(), &PHYSICS_EDGES)?;
    let mut wrng = substream(seed, &["physics", "weights"]);
    let d = dag.n_nodes();
    let mut a = vec![vec![0.0; d]; d];
    for (i, j) in dag.edges() {
        let mag = wrng.gen_range(0.1..=1.0);
        let sign = if wrng.gen::<bool>() { 1.0 } else { -1.0 };
        a[i][j] = sign * mag;
    }
    let order = dag.topological_order().expect("fixed graph is acyclic");
    let mut data = Array2::zeros((n, d));
    for &node in &order {
        let mut rng = substream(seed, &["physics", &node.to_string()]);
        for i in 0..n {
            let mut s = 0.0f64;
            for &p in &dag.parents(node) {
                s += a[p][node] * (data[[i, p]] + 0.5);
            }
            let z: f64 = rng.sample(StandardNormal);
            data[[i, node]] = 2.0 * s.sin() + s + z;
        }
    }
    Ok((dag, Dataset::new(names, data)?))
}

/// Covariance of a column pair, used by tests and the pruning module.
pub(crate) fn sample_cov(x: ndarray::ArrayView1<f64>, y: ndarray::ArrayView1<f64>) -> f64 {
    let n = x.len() as f64;
    let mx = x.sum() / n;
    let my = y.sum() / n;
    x.iter().zip(y.iter()).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_dag_is_acyclic_and_seeded() {
        let cfg = GenConfig::new(8, 10, 42);
        let a = gen_er_dag(&cfg).unwrap();
        let b = gen_er_dag(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.topological_order().is_some());
    }

    #[test]
    fn small_d_caps_edge_probability() {
        let cfg = GenConfig {
            d: 2,
            expected_edges: 8.0,
            n: 1,
            noise_std: 1.0,
            seed: 0,
        };
        assert_eq!(cfg.edge_probability(), 1.0);
        for seed in 0..20 {
            let dag = gen_er_dag(&GenConfig { seed, ..cfg.clone() }).unwrap();
            assert_eq!(dag.n_edges(), 1);
        }
    }

    #[test]
    fn er_mean_edge_count_matches_binomial() {
        // D=10: p = 40/45, expected edges = 40; binomial sd = sqrt(45·p·(1-p)).
        let d = 10;
        let pairs = 45.0;
        let p: f64 = (40.0f64 / pairs).min(1.0);
        let expect = pairs * p;
        let sd_mean = (pairs * p * (1.0 - p)).sqrt() / (1000.0f64).sqrt();
        let mut total = 0.0;
        for seed in 0..1000 {
            let dag = gen_er_dag(&GenConfig::new(d, 1, seed)).unwrap();
            total += dag.n_edges() as f64;
        }
        let mean = total / 1000.0;
        assert!(
            (mean - expect).abs() < 3.0 * sd_mean,
            "mean {mean} vs expected {expect} (3se {:.3})",
            3.0 * sd_mean
        );
    }

    #[test]
    fn empty_graph_gives_iid_noise() {
        let dag = Dag::empty(node_names(3));
        let cfg = GenConfig {
            d: 3,
            expected_edges: 0.0,
            n: 10_000,
            noise_std: 0.7,
            seed: 11,
        };
        let ds = sample_gp_anm(&dag, &cfg).unwrap();
        for j in 0..3 {
            let col = ds.column(j);
            let var = sample_cov(col, col);
            assert!(
                (var - 0.49).abs() < 0.05 * 0.49 + 0.02,
                "column {j} variance {var}"
            );
        }
    }

    #[test]
    fn rbf_gram_diagonal_is_one() {
        let pts = ndarray::array![[0.0, 1.0], [2.0, -1.0], [0.5, 0.5]];
        let k = rbf_gram(&pts);
        for i in 0..3 {
            assert_eq!(k[i * 3 + i], 1.0);
        }
    }

    #[test]
    fn gp_identical_parent_rows_share_function_values() {
        // Duplicate parent rows force equal GP function values; only the
        // additive noise differs, so the difference of the child values
        // equals the difference of the noises. We check the structural
        // property through the Gram matrix rank instead of sampling noise.
        let pts = ndarray::Array2::from_shape_vec((4, 1), vec![1.0, 1.0, -2.0, 0.3]).unwrap();
        let k = rbf_gram(&pts);
        for c in 0..4 {
            assert!((k[c] - k[4 + c]).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_chain_covariance_closed_form() {
        // x0 ~ N(0,1), x1 = w·x0 + N(0,1): cov = [[1, w], [w, w²+1]].
        let dag = Dag::new(node_names(2), &[(0, 1)]).unwrap();
        let cfg = GenConfig {
            d: 2,
            expected_edges: 1.0,
            n: 10_000,
            noise_std: 1.0,
            seed: 3,
        };
        let ds = sample_linear_anm(&dag, 0.9, 0.9, &cfg).unwrap();
        // weight magnitude fixed at 0.9; recover its sign from the data
        let c01 = sample_cov(ds.column(0), ds.column(1));
        let w = 0.9f64.copysign(c01);
        let v0 = sample_cov(ds.column(0), ds.column(0));
        let v1 = sample_cov(ds.column(1), ds.column(1));
        assert!((v0 - 1.0).abs() < 0.05);
        assert!((c01 - w).abs() < 0.05);
        assert!((v1 - (w * w + 1.0)).abs() < 0.05 * (w * w + 1.0) + 0.02);
    }

    #[test]
    fn zero_weight_linear_anm_gives_independent_columns() {
        let dag = Dag::new(node_names(2), &[(0, 1)]).unwrap();
        let cfg = GenConfig {
            d: 2,
            expected_edges: 1.0,
            n: 20_000,
            noise_std: 1.0,
            seed: 9,
        };
        let ds = sample_linear_anm(&dag, 0.0, 0.0, &cfg).unwrap();
        let c01 = sample_cov(ds.column(0), ds.column(1));
        assert!(c01.abs() < 0.03);
    }

    #[test]
    fn physics_graph_and_roots() {
        let (dag, ds) = gen_physics(200, 7).unwrap();
        assert_eq!(dag.n_edges(), 10);
        assert_eq!(dag.names()[0], "TSI");
        // Root column is exactly its noise stream.
        let mut rng = substream(7, &["physics", "0"]);
        for i in 0..200 {
            let z: f64 = rng.sample(StandardNormal);
            assert_eq!(ds.data()[[i, 0]], z);
        }
    }

    #[test]
    fn physics_weights_within_support() {
        let mut wrng = substream(123, &["physics", "weights"]);
        for _ in 0..10 {
            let mag = wrng.gen_range(0.1..=1.0);
            assert!((0.1..=1.0).contains(&mag));
        }
    }

    #[test]
    fn seeded_determinism() {
        let dag = Dag::new(node_names(3), &[(0, 1), (1, 2)]).unwrap();
        let cfg = GenConfig::new(3, 50, 99);
        let a = sample_gp_anm(&dag, &cfg).unwrap();
        let b = sample_gp_anm(&dag, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
