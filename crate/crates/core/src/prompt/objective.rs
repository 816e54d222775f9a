//! Few-shot, complementary and combined test-time losses with their exact
//! gradients with respect to the centroid and layer prompts.

use crate::error::{Error, Result};
use crate::graph::FewShotSplit;
use crate::linalg::dense::{axpy, dot, norm};
use crate::linalg::NORM_EPS;
use crate::pretrain::EmbeddingStack;
use crate::prompt::{CentroidMatrix, ComplementaryLabels, LayerMode, Prompts, TgclMode, TuneConfig};

/// Lower clamp on `1 - p` inside the complementary log.
pub const COMPLEMENT_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum TermKind {
    /// `-log p_y`
    Positive,
    /// `-log(1 - p_ȳ)`
    Complementary,
}

struct TermGroup<'a> {
    nodes: &'a [usize],
    classes: &'a [usize],
    kind: TermKind,
    weight: f64,
}

/// Labels attached to test nodes during tuning.
#[derive(Clone, Debug, PartialEq)]
pub enum TestSupervision {
    /// Few-shot tuning only.
    None,
    Complementary(ComplementaryLabels),
    /// Most-similar-class labels used as positive targets.
    Pseudo { nodes: Vec<usize>, labels: Vec<usize> },
}

impl TestSupervision {
    fn group(&self, weight: f64) -> Option<TermGroup<'_>> {
        match self {
            TestSupervision::None => None,
            TestSupervision::Complementary(c) => Some(TermGroup {
                nodes: &c.nodes,
                classes: &c.labels,
                kind: TermKind::Complementary,
                weight,
            }),
            TestSupervision::Pseudo { nodes, labels } => Some(TermGroup {
                nodes,
                classes: labels,
                kind: TermKind::Positive,
                weight,
            }),
        }
    }

    pub fn num_nodes(&self) -> usize {
        match self {
            TestSupervision::None => 0,
            TestSupervision::Complementary(c) => c.nodes.len(),
            TestSupervision::Pseudo { nodes, .. } => nodes.len(),
        }
    }
}

/// Loss values and prompt gradients at one point.
#[derive(Clone, Debug)]
pub struct ObjectiveValue {
    /// Test-node term (complementary or pseudo), 0 without supervision.
    pub loss_te: f64,
    pub loss_fs: f64,
    pub loss_tgcl: f64,
    pub grad_beta: CentroidMatrix,
    pub grad_eta: Vec<f64>,
}

struct Grads {
    e: CentroidMatrix,
    eta: Vec<f64>,
    /// Σ ds·s per (layer, class), for the radial part of the cosine adjoint.
    radial: Vec<f64>,
}

fn check(stack: &EmbeddingStack, e: &CentroidMatrix, eta: &[f64], tau: f64) -> Result<()> {
    if !(tau > 0.0) {
        return Err(Error::InvalidTemperature(tau));
    }
    if stack.depth() != e.depth() || stack.dim() != e.dim() || eta.len() != e.depth() {
        return Err(Error::Shape(format!(
            "stack depth {} width {}, centroids {:?}, {} layer weights",
            stack.depth(),
            stack.dim(),
            e.shape(),
            eta.len()
        )));
    }
    Ok(())
}

/// Evaluates every group, returning `Σ_l mean_i term` per group, and
/// accumulates weighted gradients when `grads` is given.
fn evaluate(
    stack: &EmbeddingStack,
    e: &CentroidMatrix,
    eta: &[f64],
    tau: f64,
    groups: &[TermGroup<'_>],
    mut grads: Option<&mut Grads>,
) -> Result<Vec<f64>> {
    let (depth, classes, _) = e.shape();
    let e_norm: Vec<f64> = (0..depth)
        .flat_map(|l| (0..classes).map(move |c| (l, c)))
        .map(|(l, c)| norm(e.get(l, c)))
        .collect();
    let mut sims = vec![0.0; classes];
    let mut p = vec![0.0; classes];
    let mut dz = vec![0.0; classes];
    let mut values = Vec::with_capacity(groups.len());

    for group in groups {
        if group.nodes.len() != group.classes.len() {
            return Err(Error::Shape("target nodes and classes differ in length".into()));
        }
        if group.nodes.is_empty() {
            values.push(0.0);
            continue;
        }
        let inv_n = 1.0 / group.nodes.len() as f64;
        let scale = group.weight * inv_n;
        let mut total = 0.0;
        for (&i, &k) in group.nodes.iter().zip(group.classes) {
            if i >= stack.num_nodes() {
                return Err(Error::Index {
                    index: i,
                    num_nodes: stack.num_nodes(),
                });
            }
            if k >= classes {
                return Err(Error::Shape(format!("target class {k} with {classes} classes")));
            }
            for l in 0..depth {
                let h = stack.embedding(l, i);
                let nh = norm(h);
                for c in 0..classes {
                    let ne = e_norm[l * classes + c];
                    sims[c] = if nh < NORM_EPS || ne < NORM_EPS {
                        0.0
                    } else {
                        dot(h, e.get(l, c)) / (nh * ne)
                    };
                }
                let logits: Vec<f64> = sims.iter().map(|s| eta[l] * s / tau).collect();
                let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let sum_exp: f64 = logits.iter().map(|z| (z - max).exp()).sum();
                for c in 0..classes {
                    p[c] = (logits[c] - max).exp() / sum_exp;
                }
                let mut live = true;
                match group.kind {
                    TermKind::Positive => {
                        total += -(logits[k] - max - sum_exp.ln());
                        for c in 0..classes {
                            dz[c] = p[c] - f64::from(u8::from(c == k));
                        }
                    }
                    TermKind::Complementary => {
                        let q = 1.0 - p[k];
                        if q < COMPLEMENT_FLOOR {
                            total += -COMPLEMENT_FLOOR.ln();
                            live = false;
                        } else {
                            total += -q.ln();
                            for c in 0..classes {
                                let delta = f64::from(u8::from(c == k));
                                dz[c] = p[k] * (delta - p[c]) / q;
                            }
                        }
                    }
                }
                let Some(g) = grads.as_deref_mut() else { continue };
                if !live || scale == 0.0 {
                    continue;
                }
                g.eta[l] += scale * dot(&dz, &sims) / tau;
                for c in 0..classes {
                    let ne = e_norm[l * classes + c];
                    if nh < NORM_EPS || ne < NORM_EPS {
                        continue;
                    }
                    let ds = scale * dz[c] * eta[l] / tau;
                    axpy(ds / (nh * ne), h, g.e.get_mut(l, c));
                    g.radial[l * classes + c] += ds * sims[c];
                }
            }
        }
        values.push(total * inv_n);
    }

    if let Some(g) = grads {
        for l in 0..depth {
            for c in 0..classes {
                let ne = e_norm[l * classes + c];
                if ne < NORM_EPS {
                    continue;
                }
                let coef = -g.radial[l * classes + c] / (ne * ne);
                let centroid = e.get(l, c).to_vec();
                axpy(coef, &centroid, g.e.get_mut(l, c));
            }
        }
    }
    Ok(values)
}

/// Complementary-label test-time loss
/// `-Σ_l mean_i log(1 - p^(l)_{ȳ_i})`, with `p^(l) = softmax_c(η_l sim / τ)`
/// and the log argument clamped below at [`COMPLEMENT_FLOOR`].
pub fn loss_te(
    stack: &EmbeddingStack,
    e_tilde: &CentroidMatrix,
    eta: &[f64],
    comp: &ComplementaryLabels,
    tau: f64,
) -> Result<f64> {
    check(stack, e_tilde, eta, tau)?;
    let group = TermGroup {
        nodes: &comp.nodes,
        classes: &comp.labels,
        kind: TermKind::Complementary,
        weight: 1.0,
    };
    Ok(evaluate(stack, e_tilde, eta, tau, &[group], None)?[0])
}

/// Few-shot cross-entropy `-Σ_l mean_i log p^(l)_{y_i}` over the shots.
pub fn loss_fs(
    stack: &EmbeddingStack,
    e_tilde: &CentroidMatrix,
    eta: &[f64],
    split: &FewShotSplit,
    tau: f64,
) -> Result<f64> {
    check(stack, e_tilde, eta, tau)?;
    let (nodes, classes): (Vec<usize>, Vec<usize>) = split.shot_pairs().unzip();
    let group = TermGroup {
        nodes: &nodes,
        classes: &classes,
        kind: TermKind::Positive,
        weight: 1.0,
    };
    Ok(evaluate(stack, e_tilde, eta, tau, &[group], None)?[0])
}

/// Weight on the test-node term for a tuning mode.
pub fn effective_gamma(cfg: &TuneConfig, sup: &TestSupervision) -> f64 {
    match (cfg.tgcl_mode, sup) {
        (TgclMode::FewShotOnly, _) | (_, TestSupervision::None) => 0.0,
        _ => cfg.gamma,
    }
}

/// Combined objective `γ L_Te + (1-γ) L_Fs` on the refined centroids
/// `e + β`, with gradients for `β` and `η`. In frozen-uniform layer mode the
/// `η` gradient is reported as zero.
pub fn tgcl_objective(
    stack: &EmbeddingStack,
    e: &CentroidMatrix,
    prompts: &Prompts,
    split: &FewShotSplit,
    sup: &TestSupervision,
    cfg: &TuneConfig,
) -> Result<ObjectiveValue> {
    objective(stack, e, prompts, split, sup, cfg, true)
}

fn objective(
    stack: &EmbeddingStack,
    e: &CentroidMatrix,
    prompts: &Prompts,
    split: &FewShotSplit,
    sup: &TestSupervision,
    cfg: &TuneConfig,
    with_grads: bool,
) -> Result<ObjectiveValue> {
    if !(0.0..=1.0).contains(&cfg.gamma) {
        return Err(Error::Config(format!("gamma {} is outside [0, 1]", cfg.gamma)));
    }
    let e_tilde = e.add(&prompts.beta)?;
    check(stack, &e_tilde, &prompts.eta, cfg.tau)?;
    let gamma = effective_gamma(cfg, sup);
    let (shot_nodes, shot_classes): (Vec<usize>, Vec<usize>) = split.shot_pairs().unzip();
    let mut groups = vec![TermGroup {
        nodes: &shot_nodes,
        classes: &shot_classes,
        kind: TermKind::Positive,
        weight: 1.0 - gamma,
    }];
    groups.extend(sup.group(gamma));

    let (depth, classes, dim) = e.shape();
    let mut grads = Grads {
        e: CentroidMatrix::zeros(depth, classes, dim),
        eta: vec![0.0; depth],
        radial: vec![0.0; depth * classes],
    };
    let values = evaluate(
        stack,
        &e_tilde,
        &prompts.eta,
        cfg.tau,
        &groups,
        with_grads.then_some(&mut grads),
    )?;
    let loss_fs = values[0];
    let loss_te = values.get(1).copied().unwrap_or(0.0);
    let loss_tgcl = if groups.len() > 1 {
        gamma * loss_te + (1.0 - gamma) * loss_fs
    } else {
        loss_fs
    };
    if cfg.layer_mode == LayerMode::FrozenUniform {
        grads.eta.iter_mut().for_each(|g| *g = 0.0);
    }
    Ok(ObjectiveValue {
        loss_te,
        loss_fs,
        loss_tgcl,
        grad_beta: grads.e,
        grad_eta: grads.eta,
    })
}

/// `γ L_Te + (1-γ) L_Fs` at the current prompts.
pub fn tgcl_loss(
    stack: &EmbeddingStack,
    e: &CentroidMatrix,
    prompts: &Prompts,
    split: &FewShotSplit,
    sup: &TestSupervision,
    cfg: &TuneConfig,
) -> Result<f64> {
    objective(stack, e, prompts, split, sup, cfg, false).map(|o| o.loss_tgcl)
}

/// Exact gradients of [`tgcl_loss`] with respect to `β` and `η`.
pub fn tgcl_gradients(
    stack: &EmbeddingStack,
    e: &CentroidMatrix,
    prompts: &Prompts,
    split: &FewShotSplit,
    sup: &TestSupervision,
    cfg: &TuneConfig,
) -> Result<(CentroidMatrix, Vec<f64>)> {
    let o = tgcl_objective(stack, e, prompts, split, sup, cfg)?;
    Ok((o.grad_beta, o.grad_eta))
}
