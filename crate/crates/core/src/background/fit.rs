//! Maximum-entropy fits for the degree and block priors.
//!
//! Vertices with identical constraint data (same degree, or same in/out
//! degrees, and same block) share one multiplier at the optimum, so the dual
//! is solved over those classes. Each sweep takes one damped Newton step per
//! multiplier, cycling through all of them.

use std::collections::BTreeMap;

use super::{Base, BackgroundModel, Prior, MULTIPLIER_BOUND};
use crate::error::{Error, Result};
use crate::graph::{AttributeValues, AttributedGraph};
use crate::math::{log1pexp, logit, sigmoid};

#[derive(Clone, Copy, Debug)]
pub struct FitOptions {
    /// Absolute tolerance on each vertex's expected degree and each block's
    /// expected edge count.
    pub tol: f64,
    pub max_iter: usize,
    /// Let vertices of degree 0 or n-1 saturate at the multiplier bound
    /// instead of failing the fit.
    pub clamp_extremal: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tol: 1e-4,
            max_iter: 500,
            clamp_extremal: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub sweeps: usize,
    /// Worst |expected - observed| over vertex degree constraints.
    pub max_degree_residual: f64,
    /// Worst |expected - observed| over block edge-count constraints.
    pub max_block_residual: f64,
    /// Name of the constraint with the largest residual.
    pub worst_constraint: String,
    /// Multipliers stuck at the bound because their constraint has no finite solution.
    pub saturated: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Var {
    Row(usize),
    Col(usize),
    Gamma(usize, usize),
}

struct Group {
    mult: f64,
    terms: Vec<(usize, f64)>,
}

struct Dual {
    vars: Vec<f64>,
    kinds: Vec<Var>,
    targets: Vec<f64>,
    /// Per variable: (group, coefficient).
    incidence: Vec<Vec<(usize, f64)>>,
    groups: Vec<Group>,
    class_size: Vec<f64>,
}

impl Dual {
    fn logit(&self, g: usize) -> f64 {
        self.groups[g].terms.iter().map(|&(v, c)| c * self.vars[v]).sum()
    }

    fn gradient(&self, v: usize) -> f64 {
        let mut expected = 0.0;
        for &(g, c) in &self.incidence[v] {
            expected += self.groups[g].mult * c * sigmoid(self.logit(g));
        }
        self.targets[v] - expected
    }

    /// One damped Newton step on variable `v`.
    fn step(&mut self, v: usize) {
        let x0 = self.vars[v];
        let inc = &self.incidence[v];
        let base: Vec<f64> = inc.iter().map(|&(g, c)| self.logit(g) - c * x0).collect();
        let partial = |x: f64| -> f64 {
            let mut f = self.targets[v] * x;
            for (i, &(g, c)) in inc.iter().enumerate() {
                f -= self.groups[g].mult * log1pexp(base[i] + c * x);
            }
            f
        };
        let mut grad = self.targets[v];
        let mut hess = 0.0;
        for (i, &(g, c)) in inc.iter().enumerate() {
            let p = sigmoid(base[i] + c * x0);
            grad -= self.groups[g].mult * c * p;
            hess += self.groups[g].mult * c * c * p * (1.0 - p);
        }
        if grad == 0.0 {
            return;
        }
        let mut delta = if hess > 1e-300 { grad / hess } else { grad.signum() };
        delta = delta.clamp(-10.0, 10.0);
        let f0 = partial(x0);
        for _ in 0..50 {
            let x = (x0 + delta).clamp(-MULTIPLIER_BOUND, MULTIPLIER_BOUND);
            if partial(x) >= f0 {
                self.vars[v] = x;
                return;
            }
            delta *= 0.5;
        }
    }

    fn is_saturated(&self, v: usize, grad: f64) -> bool {
        (self.vars[v] >= MULTIPLIER_BOUND && grad > 0.0)
            || (self.vars[v] <= -MULTIPLIER_BOUND && grad < 0.0)
    }

    /// (max degree residual, max block residual, worst variable, saturated count)
    fn residuals(&self) -> (f64, f64, Option<usize>, usize) {
        let mut deg: f64 = 0.0;
        let mut blk: f64 = 0.0;
        let mut worst = None;
        let mut worst_val = -1.0;
        let mut saturated = 0;
        for v in 0..self.vars.len() {
            let grad = self.gradient(v);
            if self.is_saturated(v, grad) {
                saturated += 1;
                continue;
            }
            let r = match self.kinds[v] {
                Var::Row(c) | Var::Col(c) => {
                    let r = grad.abs() / self.class_size[c];
                    deg = deg.max(r);
                    r
                }
                Var::Gamma(..) => {
                    blk = blk.max(grad.abs());
                    grad.abs()
                }
            };
            if r > worst_val {
                worst_val = r;
                worst = Some(v);
            }
        }
        (deg, blk, worst, saturated)
    }
}

struct Classes {
    of_vertex: Vec<usize>,
    size: Vec<f64>,
    bin: Vec<usize>,
    /// Observed degree (undirected) or out-degree, per class.
    deg_out: Vec<f64>,
    deg_in: Vec<f64>,
}

fn classes(g: &AttributedGraph, bins: &[usize], use_degrees: bool) -> Classes {
    let mut index: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
    let mut keys = Vec::with_capacity(g.n());
    for u in 0..g.n() as u32 {
        let (o, i) = if use_degrees {
            (g.neighbors(u).len(), if g.is_directed() { g.in_neighbors(u).len() } else { 0 })
        } else {
            (0, 0)
        };
        let key = (bins[u as usize], o, i);
        let next = index.len();
        index.entry(key).or_insert(next);
        keys.push(key);
    }
    // renumber in key order so class ids do not depend on vertex order
    let order: BTreeMap<(usize, usize, usize), usize> =
        index.keys().enumerate().map(|(i, k)| (*k, i)).collect();
    let k = order.len();
    let mut out = Classes {
        of_vertex: Vec::with_capacity(g.n()),
        size: vec![0.0; k],
        bin: vec![0; k],
        deg_out: vec![0.0; k],
        deg_in: vec![0.0; k],
    };
    for key in keys {
        let c = order[&key];
        out.of_vertex.push(c);
        out.size[c] += 1.0;
        out.bin[c] = key.0;
        out.deg_out[c] = key.1 as f64;
        out.deg_in[c] = key.2 as f64;
    }
    out
}

fn build_dual(
    g: &AttributedGraph,
    cls: &Classes,
    nbins: usize,
    with_degrees: bool,
    with_blocks: bool,
    bins: &[usize],
) -> Dual {
    let n = g.n() as f64;
    let k = cls.size.len();
    let directed = g.is_directed();
    let mut kinds = Vec::new();
    let mut targets = Vec::new();
    let mut vars = Vec::new();
    let mut row_var = vec![usize::MAX; k];
    let mut col_var = vec![usize::MAX; k];
    if with_degrees {
        for c in 0..k {
            row_var[c] = kinds.len();
            kinds.push(Var::Row(c));
            targets.push(cls.size[c] * cls.deg_out[c]);
            vars.push(0.5 * logit((cls.deg_out[c] / (n - 1.0)).clamp(1e-13, 1.0 - 1e-13)));
            if directed {
                col_var[c] = kinds.len();
                kinds.push(Var::Col(c));
                targets.push(cls.size[c] * cls.deg_in[c]);
                vars.push(0.5 * logit((cls.deg_in[c] / (n - 1.0)).clamp(1e-13, 1.0 - 1e-13)));
            } else {
                col_var[c] = row_var[c];
            }
        }
        for x in &mut vars {
            *x = x.clamp(-MULTIPLIER_BOUND, MULTIPLIER_BOUND);
        }
    }

    // observed edges per block
    let mut block_edges = vec![0.0; nbins * nbins];
    if with_blocks {
        for (u, v) in g.edges() {
            let (a, b) = (bins[u as usize], bins[v as usize]);
            let (a, b) = if directed || a <= b { (a, b) } else { (b, a) };
            block_edges[a * nbins + b] += 1.0;
        }
    }

    let mut groups = Vec::new();
    let mut gamma_var: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for c in 0..k {
        let lo = if directed { 0 } else { c };
        for d in lo..k {
            let mult = if c == d {
                if directed {
                    cls.size[c] * (cls.size[c] - 1.0)
                } else {
                    cls.size[c] * (cls.size[c] - 1.0) / 2.0
                }
            } else {
                cls.size[c] * cls.size[d]
            };
            if mult == 0.0 {
                continue;
            }
            let mut terms = Vec::with_capacity(3);
            if with_degrees {
                if !directed && c == d {
                    terms.push((row_var[c], 2.0));
                } else {
                    terms.push((row_var[c], 1.0));
                    terms.push((col_var[d], 1.0));
                }
            }
            if with_blocks {
                let (a, b) = (cls.bin[c], cls.bin[d]);
                let key = if directed || a <= b { (a, b) } else { (b, a) };
                let v = *gamma_var.entry(key).or_insert_with(|| {
                    kinds.push(Var::Gamma(key.0, key.1));
                    targets.push(block_edges[key.0 * nbins + key.1]);
                    vars.push(0.0);
                    kinds.len() - 1
                });
                terms.push((v, 1.0));
            }
            groups.push(Group { mult, terms });
        }
    }

    if !with_degrees {
        // no degree multipliers: start each block at its observed density
        let mut pairs = vec![0.0; kinds.len()];
        for grp in &groups {
            for &(v, _) in &grp.terms {
                pairs[v] += grp.mult;
            }
        }
        for v in 0..vars.len() {
            let q = (targets[v] / pairs[v]).clamp(1e-13, 1.0 - 1e-13);
            vars[v] = logit(q).clamp(-MULTIPLIER_BOUND, MULTIPLIER_BOUND);
        }
    }

    let mut incidence = vec![Vec::new(); kinds.len()];
    for (gi, grp) in groups.iter().enumerate() {
        for &(v, c) in &grp.terms {
            incidence[v].push((gi, c));
        }
    }
    Dual {
        vars,
        kinds,
        targets,
        incidence,
        groups,
        class_size: cls.size.clone(),
    }
}

fn solve(dual: &mut Dual, opts: &FitOptions, label: impl Fn(Var) -> String) -> Result<FitReport> {
    let mut sweeps = 0;
    loop {
        let (deg, blk, worst, saturated) = dual.residuals();
        if deg.max(blk) <= opts.tol {
            if saturated > 0 {
                log::warn!("{saturated} multiplier(s) saturated at ±{MULTIPLIER_BOUND}");
            }
            return Ok(FitReport {
                sweeps,
                max_degree_residual: deg,
                max_block_residual: blk,
                worst_constraint: worst.map(|v| label(dual.kinds[v])).unwrap_or_default(),
                saturated,
            });
        }
        if sweeps >= opts.max_iter {
            return Err(Error::NonConvergence {
                iterations: sweeps,
                residual: deg.max(blk),
                constraint: worst.map(|v| label(dual.kinds[v])).unwrap_or_default(),
            });
        }
        for v in 0..dual.vars.len() {
            dual.step(v);
        }
        sweeps += 1;
    }
}

fn check_extremal(g: &AttributedGraph, opts: &FitOptions) -> Result<()> {
    let n = g.n();
    let extremal = (0..n as u32)
        .filter(|&u| {
            let out = g.neighbors(u).len();
            let inn = g.in_neighbors(u).len();
            out == 0 || out == n - 1 || (g.is_directed() && (inn == 0 || inn == n - 1))
        })
        .count();
    if extremal > 0 {
        if !opts.clamp_extremal {
            return Err(Error::InvalidArgument(format!(
                "{extremal} vertices have degree 0 or n-1; enable clamping to fit anyway"
            )));
        }
        log::warn!("{extremal} vertices have extremal degree; their multipliers will saturate");
    }
    Ok(())
}

fn fit(
    g: &AttributedGraph,
    bins: Vec<usize>,
    nbins: usize,
    with_degrees: bool,
    with_blocks: bool,
    prior: Prior,
    opts: &FitOptions,
) -> Result<(BackgroundModel, FitReport)> {
    if g.n() < 2 {
        return Err(Error::InvalidArgument("need at least two vertices".into()));
    }
    if g.edge_count() == 0 {
        return Err(Error::InvalidArgument("graph has no edges".into()));
    }
    if with_degrees {
        check_extremal(g, opts)?;
    }
    let cls = classes(g, &bins, with_degrees);
    let mut dual = build_dual(g, &cls, nbins, with_degrees, with_blocks, &bins);
    let class_label = |c: usize| {
        let u = cls.of_vertex.iter().position(|&x| x == c).unwrap_or(0);
        g.label(u as u32).to_string()
    };
    let report = solve(&mut dual, opts, |v| match v {
        Var::Row(c) if g.is_directed() => format!("out-degree of vertex {}", class_label(c)),
        Var::Row(c) => format!("degree of vertex {}", class_label(c)),
        Var::Col(c) => format!("in-degree of vertex {}", class_label(c)),
        Var::Gamma(a, b) => format!("block ({a},{b})"),
    })?;

    let n = g.n();
    let mut row = vec![0.0; n];
    let mut col = vec![0.0; n];
    let mut gamma = vec![0.0; nbins * nbins];
    for (v, kind) in dual.kinds.iter().enumerate() {
        match *kind {
            Var::Row(c) => {
                for u in 0..n {
                    if cls.of_vertex[u] == c {
                        row[u] = dual.vars[v];
                    }
                }
            }
            Var::Col(c) => {
                for u in 0..n {
                    if cls.of_vertex[u] == c {
                        col[u] = dual.vars[v];
                    }
                }
            }
            Var::Gamma(a, b) => {
                gamma[a * nbins + b] = dual.vars[v];
                if !g.is_directed() {
                    gamma[b * nbins + a] = dual.vars[v];
                }
            }
        }
    }
    let base = Base::Logistic {
        row,
        col: g.is_directed().then_some(col),
        bin: bins.iter().map(|&b| b as u32).collect(),
        bins: nbins,
        gamma,
    };
    Ok((BackgroundModel::from_base(n, g.is_directed(), prior, base), report))
}

/// Every pair gets the same probability `density`.
pub fn fit_density_prior(g: &AttributedGraph, density: f64) -> Result<BackgroundModel> {
    if !(density > 0.0 && density < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "density must lie in (0,1), got {density}"
        )));
    }
    Ok(BackgroundModel::from_base(
        g.n(),
        g.is_directed(),
        Prior::Density,
        Base::Uniform(density),
    ))
}

/// Observed edge density: m over the number of vertex pairs.
pub fn observed_density(g: &AttributedGraph) -> f64 {
    let n = g.n() as f64;
    let pairs = if g.is_directed() {
        n * (n - 1.0)
    } else {
        n * (n - 1.0) / 2.0
    };
    g.edge_count() as f64 / pairs
}

/// Product-of-Bernoullis model matching every vertex's expected degree.
pub fn fit_degree_prior(g: &AttributedGraph, opts: &FitOptions) -> Result<(BackgroundModel, FitReport)> {
    fit(g, vec![0; g.n()], 1, true, false, Prior::Degree, opts)
}

/// Model matching the expected edge count of every block, where blocks are
/// intersections of the bins of the listed nominal attributes, optionally
/// together with the degree constraints.
pub fn fit_block_prior(
    g: &AttributedGraph,
    partitions: &[&str],
    with_degrees: bool,
    opts: &FitOptions,
) -> Result<(BackgroundModel, FitReport)> {
    if partitions.is_empty() {
        return Err(Error::InvalidArgument("block prior needs at least one attribute".into()));
    }
    let mut cols = Vec::new();
    for name in partitions {
        let (_, col) = g
            .attribute(name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))?;
        match col.values() {
            AttributeValues::Nominal { codes, .. } => cols.push(codes),
            AttributeValues::Numeric(_) => {
                return Err(Error::KindMismatch {
                    name: name.to_string(),
                    actual: "numeric",
                    expected: "nominal",
                })
            }
        }
    }
    // bin = tuple of codes across partitions; a missing value is its own bin
    let keys: Vec<Vec<Option<u32>>> = (0..g.n())
        .map(|u| cols.iter().map(|codes| codes[u]).collect())
        .collect();
    let index: BTreeMap<&Vec<Option<u32>>, usize> = keys
        .iter()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, k)| (k, i))
        .collect();
    let bins: Vec<usize> = keys.iter().map(|k| index[k]).collect();
    let nbins = index.len();
    let prior = Prior::Blocks {
        attributes: partitions.iter().map(|s| s.to_string()).collect(),
        with_degrees,
    };
    fit(g, bins, nbins, with_degrees, true, prior, opts)
}
