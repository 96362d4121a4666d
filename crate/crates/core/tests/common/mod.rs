//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls into the library's algorithms.

#![allow(dead_code)]

use std::collections::BTreeMap;

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod (7/15) quadrature for the incomplete Beta integral.
// ---------------------------------------------------------------------------

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, (kronrod - gauss).abs() * h)
}

fn adaptive(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64, depth: u32) -> f64 {
    let (k, err) = gk15(f, lo, hi);
    // Below ~50 ulp of the segment value the estimate is rounding noise.
    if err <= tol.max(50.0 * f64::EPSILON * k.abs()) || depth == 0 {
        return k;
    }
    let mid = 0.5 * (lo + hi);
    adaptive(f, lo, mid, 0.5 * tol, depth - 1) + adaptive(f, mid, hi, 0.5 * tol, depth - 1)
}

/// Integral with a tolerance relative to a coarse first estimate.
fn integrate(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let (coarse, _) = gk15(f, lo, hi);
    adaptive(f, lo, hi, (1e-15 * coarse.abs()).max(f64::MIN_POSITIVE), 40)
}

/// `∫₀^z t^(a-1) (1-t)^(b-1) dt` by quadrature. The interval is split at
/// `m = min(z, 1/2)`. A singular factor is removed by substitution:
/// `u = t^a` on `[0, m]` when `a < 1`, `s = (1-t)^b` on `[m, z]` when `b < 1`.
pub fn incomplete_beta_quad(z: f64, a: f64, b: f64) -> f64 {
    let m = z.min(0.5);
    let direct = |t: f64| t.powf(a - 1.0) * (1.0 - t).powf(b - 1.0);
    let mut total = if a < 1.0 {
        let f = |u: f64| (1.0 - u.powf(1.0 / a)).powf(b - 1.0);
        integrate(&f, 0.0, m.powf(a)) / a
    } else {
        integrate(&direct, 0.0, m)
    };
    if z > m {
        total += if b < 1.0 {
            let g = |s: f64| (1.0 - s.powf(1.0 / b)).powf(a - 1.0);
            integrate(&g, (1.0 - z).powf(b), (1.0 - m).powf(b)) / b
        } else {
            integrate(&direct, m, z)
        };
    }
    total
}

// ---------------------------------------------------------------------------
// Naive DAG testing with exact rational budgets.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NaiveCause {
    Budget,
    Ancestor,
}

/// One rejection: iteration, node, cause and the budget `α · L / T` as `(L, T)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NaiveEvent {
    pub iter: usize,
    pub node: usize,
    pub cause: NaiveCause,
    pub share: (usize, usize),
}

/// `above(a, b)`: node `a` strictly dominates node `b` in the full DAG.
/// p-values and α are integers over a shared denominator.
pub fn naive_dag_test(
    parent: &[Option<usize>],
    above: &dyn Fn(usize, usize) -> bool,
    p_num: &[u64],
    alpha_num: u64,
) -> Vec<NaiveEvent> {
    let n = parent.len();
    let mut alive = vec![true; n];
    let mut events = Vec::new();
    for iter in 1.. {
        let has_alive_child = |v: usize, alive: &[bool]| (0..n).any(|u| alive[u] && parent[u] == Some(v));
        let is_root = |v: usize, alive: &[bool]| alive[v] && parent[v].is_none_or(|q| !alive[q]);
        let root_of = |mut v: usize, alive: &[bool]| {
            while let Some(q) = parent[v] {
                if !alive[q] {
                    break;
                }
                v = q;
            }
            v
        };
        let leaves: Vec<usize> = (0..n).filter(|&v| alive[v] && !has_alive_child(v, &alive)).collect();
        let total = leaves.len();
        let mut per_root: BTreeMap<usize, usize> = BTreeMap::new();
        for &l in &leaves {
            *per_root.entry(root_of(l, &alive)).or_default() += 1;
        }
        let hits: Vec<usize> = (0..n)
            .filter(|&r| is_root(r, &alive))
            .filter(|&r| {
                let l = per_root.get(&r).copied().unwrap_or(0) as u64;
                l > 0 && alpha_num > 0 && p_num[r] * total as u64 <= alpha_num * l
            })
            .collect();
        if hits.is_empty() {
            break;
        }
        for &r in &hits {
            events.push(NaiveEvent {
                iter,
                node: r,
                cause: NaiveCause::Budget,
                share: (per_root[&r], total),
            });
        }
        let mut implied = Vec::new();
        for a in 0..n {
            if !alive[a] || hits.contains(&a) {
                continue;
            }
            if let Some(&r) = hits.iter().find(|&&r| above(a, r)) {
                implied.push(NaiveEvent {
                    iter,
                    node: a,
                    cause: NaiveCause::Ancestor,
                    share: (per_root[&r], total),
                });
            }
        }
        for e in &implied {
            alive[e.node] = false;
        }
        for &r in &hits {
            alive[r] = false;
        }
        events.extend(implied);
    }
    events
}

// ---------------------------------------------------------------------------
// Forest shapes.
// ---------------------------------------------------------------------------

fn canonical(parent: &[Option<usize>], v: Option<usize>) -> String {
    let mut kids: Vec<String> = (0..parent.len())
        .filter(|&u| parent[u] == v)
        .map(|u| canonical(parent, Some(u)))
        .collect();
    kids.sort();
    format!("({})", kids.concat())
}

/// One parent array per unlabeled rooted forest on `m` nodes.
pub fn forest_shapes(m: usize) -> Vec<Vec<Option<usize>>> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    let mut parent = vec![None; m];
    fn rec(
        i: usize,
        parent: &mut Vec<Option<usize>>,
        seen: &mut std::collections::BTreeSet<String>,
        out: &mut Vec<Vec<Option<usize>>>,
    ) {
        if i == parent.len() {
            if seen.insert(canonical(parent, None)) {
                out.push(parent.clone());
            }
            return;
        }
        for choice in std::iter::once(None).chain((0..i).map(Some)) {
            parent[i] = choice;
            rec(i + 1, parent, seen, out);
        }
    }
    rec(0, &mut parent, &mut seen, &mut out);
    out
}

/// Bit pattern of node `v` as the set of its forest subtree, so that parents
/// strictly dominate children and domination is exactly forest ancestry.
pub fn subtree_bits(parent: &[Option<usize>], v: usize) -> Vec<bool> {
    (0..parent.len())
        .map(|u| {
            let mut w = Some(u);
            while let Some(x) = w {
                if x == v {
                    return true;
                }
                w = parent[x];
            }
            false
        })
        .collect()
}

/// Bit-string rendering, coordinate 1 first.
pub fn bits_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

// ---------------------------------------------------------------------------
// The seven-node example topology.
// ---------------------------------------------------------------------------

/// Nodes 1..7 of the worked example as profiles on five coordinates.
pub const EXAMPLE_NODES: [&str; 7] = ["00001", "00110", "01000", "10000", "01100", "11100", "01110"];
/// Worked-example p-values; nodes 2-4 are not significant anywhere.
pub const EXAMPLE_P: [f64; 7] = [0.01, 0.5, 0.5, 0.5, 0.01, 0.1, 0.03];

/// Parent arrays (0-based): node 5 under node 6 (fixed-parent variant) or node 7 (reparented).
pub fn example_parents(node5_under_7: bool) -> Vec<Option<usize>> {
    vec![
        None,
        Some(6),
        Some(4),
        Some(5),
        Some(if node5_under_7 { 6 } else { 5 }),
        None,
        None,
    ]
}

// ---------------------------------------------------------------------------
// Small helpers.
// ---------------------------------------------------------------------------

/// Binomial Monte-Carlo standard error.
pub fn mc_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// `x ⪯ y` on bit strings of equal length.
pub fn below(x: &[bool], y: &[bool]) -> bool {
    x.iter().zip(y).all(|(&a, &b)| !a || b)
}
