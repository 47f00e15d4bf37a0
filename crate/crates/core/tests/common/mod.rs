//! Independent oracles and a seeded corpus of small finite instances.
#![allow(dead_code)]

use fmfix::multivalued::SetValuedMap;
use fmfix::{Bijection, MapSpec, PhiFunction, Point, Space};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Root of `t² = d(1 − t)` in `[0, 1)`, from the quadratic formula.
pub fn tau_closed_form(d: f64) -> f64 {
    ((d * d + 4.0 * d).sqrt() - d) / 2.0
}

/// `t / (t + d)`, written out independently of the library.
pub fn membership(d: f64, t: f64) -> f64 {
    if d == 0.0 {
        1.0
    } else {
        t / (t + d)
    }
}

/// Builtin moduli evaluated from their formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Modulus {
    Linear(f64),
    Rational,
}

impl Modulus {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            Modulus::Linear(k) => k * t,
            Modulus::Rational => t / (1.0 + t),
        }
    }

    pub fn to_phi(self) -> PhiFunction {
        match self {
            Modulus::Linear(k) => PhiFunction::linear(k).unwrap(),
            Modulus::Rational => PhiFunction::Rational,
        }
    }
}

pub const ORACLE_GRID: usize = 10_000;
pub const ORACLE_T_MAX: f64 = 2.0;
/// Instances whose failure band is thinner than this are excluded, so the
/// uniform grid cannot step over a violation.
pub const ORACLE_MARGIN: f64 = 1e-3;

pub fn oracle_grid() -> impl Iterator<Item = f64> {
    (1..=ORACLE_GRID).map(|k| ORACLE_T_MAX * k as f64 / ORACLE_GRID as f64)
}

/// Single-valued instance on points of the real line: `f` and `g` as index maps.
#[derive(Debug, Clone)]
pub struct Instance {
    pub values: Vec<f64>,
    pub f: Vec<usize>,
    pub g: Vec<usize>,
    pub phi: Modulus,
}

fn label(v: f64) -> String {
    format!("{v}")
}

impl Instance {
    pub fn space(&self) -> Space {
        Space::finite_reals(&self.values).unwrap()
    }

    pub fn f_map(&self) -> MapSpec {
        MapSpec::table(
            self.f
                .iter()
                .enumerate()
                .map(|(i, &j)| (label(self.values[i]), label(self.values[j]))),
        )
    }

    pub fn g_map(&self) -> Bijection {
        Bijection::permutation(
            self.g
                .iter()
                .enumerate()
                .map(|(i, &j)| (label(self.values[i]), label(self.values[j]))),
        )
    }

    fn d(&self, i: usize, j: usize) -> f64 {
        (self.values[i] - self.values[j]).abs()
    }

    /// Exhaustive t-grid verdict of `M(gx,gy,t) > 1−t ⇒ M(fx,fy,φ(t)) > 1−φ(t)`.
    pub fn oracle(&self) -> bool {
        let n = self.values.len();
        for i in 0..n {
            for j in 0..n {
                let (dg, df) = (self.d(self.g[i], self.g[j]), self.d(self.f[i], self.f[j]));
                for t in oracle_grid() {
                    let s = self.phi.eval(t);
                    if membership(dg, t) > 1.0 - t && membership(df, s) <= 1.0 - s {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// True when no pair sits within [`ORACLE_MARGIN`] of the boundary.
    pub fn clear_of_boundary(&self) -> bool {
        let n = self.values.len();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let dg = self.d(self.g[i], self.g[j]);
                let df = self.d(self.f[i], self.f[j]);
                dg == 0.0
                    || (self.phi.eval(tau_closed_form(dg)) - tau_closed_form(df)).abs()
                        > ORACLE_MARGIN
            })
        })
    }
}

/// Set-valued instance with `g = id` and `T` defined on every point.
#[derive(Debug, Clone)]
pub struct SetInstance {
    pub values: Vec<f64>,
    pub images: Vec<Vec<usize>>,
    pub phi: Modulus,
}

impl SetInstance {
    pub fn space(&self) -> Space {
        Space::finite_reals(&self.values).unwrap()
    }

    pub fn map(&self) -> SetValuedMap {
        SetValuedMap::new(
            self.images
                .iter()
                .enumerate()
                .map(|(i, img)| {
                    (
                        Point::label(label(self.values[i])),
                        img.iter()
                            .map(|&j| Point::label(label(self.values[j])))
                            .collect(),
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    fn d(&self, i: usize, j: usize) -> f64 {
        (self.values[i] - self.values[j]).abs()
    }

    /// Exhaustive verdict: for every `x, y`, `u ∈ T x` and grid `t` with the
    /// antecedent, some `v ∈ T y` satisfies the consequent.
    pub fn oracle(&self) -> bool {
        let n = self.values.len();
        for x in 0..n {
            for y in 0..n {
                let dxy = self.d(x, y);
                for &u in &self.images[x] {
                    for t in oracle_grid() {
                        let s = self.phi.eval(t);
                        if membership(dxy, t) > 1.0 - t
                            && !self.images[y]
                                .iter()
                                .any(|&v| membership(self.d(u, v), s) > 1.0 - s)
                        {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    pub fn clear_of_boundary(&self) -> bool {
        let n = self.values.len();
        (0..n).all(|x| {
            (0..n).all(|y| {
                let dxy = self.d(x, y);
                dxy == 0.0
                    || self.images[x].iter().all(|&u| {
                        let best = self.images[y]
                            .iter()
                            .map(|&v| tau_closed_form(self.d(u, v)))
                            .fold(f64::INFINITY, f64::min);
                        (self.phi.eval(tau_closed_form(dxy)) - best).abs() > ORACLE_MARGIN
                    })
            })
        })
    }
}

fn distinct_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut pool: Vec<u32> = (0..=60).collect();
    pool.shuffle(rng);
    pool[..n].iter().map(|&k| k as f64 / 20.0).collect()
}

fn modulus(rng: &mut ChaCha8Rng) -> Modulus {
    if rng.gen_bool(0.25) {
        Modulus::Rational
    } else {
        Modulus::Linear([0.25, 0.5, 0.75, 0.9][rng.gen_range(0..4)])
    }
}

/// Seeded corpus of single-valued instances on 2–6 points, boundary cases removed.
pub fn corpus(seed: u64, count: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let n = rng.gen_range(2..=6);
        let values = distinct_values(&mut rng, n);
        let mut g: Vec<usize> = (0..n).collect();
        if rng.gen_bool(0.5) {
            g.shuffle(&mut rng);
        }
        // bias towards contracting maps so both verdicts occur
        let f = if rng.gen_bool(0.3) {
            let c = rng.gen_range(0..n);
            (0..n)
                .map(|i| if rng.gen_bool(0.8) { c } else { i })
                .collect()
        } else {
            (0..n).map(|_| rng.gen_range(0..n)).collect()
        };
        let inst = Instance {
            values,
            f,
            g,
            phi: modulus(&mut rng),
        };
        if inst.clear_of_boundary() {
            out.push(inst);
        }
    }
    out
}

pub fn set_corpus(seed: u64, count: usize) -> Vec<SetInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let n = rng.gen_range(2..=6);
        let values = distinct_values(&mut rng, n);
        let images = (0..n)
            .map(|_| {
                let mut idx: Vec<usize> = (0..n).collect();
                idx.shuffle(&mut rng);
                let k = rng.gen_range(1..=n);
                let mut img = idx[..k].to_vec();
                img.sort_unstable();
                img
            })
            .collect();
        let inst = SetInstance {
            values,
            images,
            phi: modulus(&mut rng),
        };
        if inst.clear_of_boundary() {
            out.push(inst);
        }
    }
    out
}
