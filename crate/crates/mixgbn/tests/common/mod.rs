//! Shared oracles for the integration suites. Everything here is derived
//! from first principles (brute force, explicit enumeration, numerical
//! integration) and stays independent of the library's implementation paths.

#![allow(dead_code)]

use mixgbn::allocation::Assignment;
use mixgbn::graph::Dag;
use mixgbn::numkern::RngStream;
use mixgbn::Dataset;
use rand_distr::{Distribution, StandardNormal};

/// Every DAG on `n` nodes, by filtering all digraphs over ordered pairs.
pub fn enumerate_dags(n: usize) -> Vec<Dag> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (0..n).filter(move |&i| i != j).map(move |i| (j, i)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u64..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(b, _)| mask & (1 << b) != 0)
            .map(|(_, &e)| e)
            .collect();
        if let Ok(g) = Dag::from_edges(n, &edges) {
            out.push(g);
        }
    }
    out
}

/// All label vectors of length `m` with contiguous labels and no empty
/// component.
pub fn enumerate_assignments(m: usize) -> Vec<Assignment> {
    let mut out = Vec::new();
    let mut z = vec![0usize; m];
    loop {
        if let Ok(a) = Assignment::new(z.clone()) {
            out.push(a);
        }
        let mut pos = 0;
        loop {
            if pos == m {
                return out;
            }
            z[pos] += 1;
            if z[pos] < m {
                break;
            }
            z[pos] = 0;
            pos += 1;
        }
    }
}

/// d-separation of `{x}` and `{y}` given `cond`, via the ancestral moral
/// graph: restrict to ancestors of `{x, y} u cond`, marry co-parents, drop
/// orientations, block conditioned nodes, then test connectivity.
pub fn d_separated(g: &Dag, x: usize, y: usize, cond: &[usize]) -> bool {
    let n = g.n();
    let mut relevant = vec![false; n];
    let mut stack: Vec<usize> = vec![x, y];
    stack.extend_from_slice(cond);
    while let Some(v) = stack.pop() {
        if std::mem::replace(&mut relevant[v], true) {
            continue;
        }
        stack.extend_from_slice(g.parents(v));
    }

    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        if !relevant[i] {
            continue;
        }
        let ps = g.parents(i);
        for &p in ps {
            if relevant[p] {
                adj[i][p] = true;
                adj[p][i] = true;
            }
        }
        for a in 0..ps.len() {
            for b in (a + 1)..ps.len() {
                if relevant[ps[a]] && relevant[ps[b]] {
                    adj[ps[a]][ps[b]] = true;
                    adj[ps[b]][ps[a]] = true;
                }
            }
        }
    }

    let blocked: Vec<bool> = (0..n).map(|v| cond.contains(&v)).collect();
    if blocked[x] || blocked[y] {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![x];
    while let Some(v) = stack.pop() {
        if v == y {
            return false;
        }
        if std::mem::replace(&mut seen[v], true) {
            continue;
        }
        for w in 0..n {
            if adj[v][w] && relevant[w] && !blocked[w] && !seen[w] {
                stack.push(w);
            }
        }
    }
    true
}

/// Recursive adaptive Simpson quadrature on `[a, b]`.
pub fn adaptive_simpson(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse(
        f: &mut dyn FnMut(f64) -> f64,
        a: f64,
        m: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, lm, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(f, m, rm, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, m, b, fa, fm, fb, whole, tol, 48)
}

/// Integral over `(0, inf)` via the substitution `w = t / (1 - t)`.
pub fn integrate_halfline(f: &mut dyn FnMut(f64) -> f64, tol: f64) -> f64 {
    let mut g = |t: f64| {
        if t <= 0.0 || t >= 1.0 {
            return 0.0;
        }
        let w = t / (1.0 - t);
        let jac = 1.0 / ((1.0 - t) * (1.0 - t));
        let v = f(w) * jac;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    adaptive_simpson(&mut g, 0.0, 1.0, tol)
}

/// Integral over the real line via `x = tan(pi (u - 1/2))`.
pub fn integrate_line(f: &mut dyn FnMut(f64) -> f64, tol: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let mut g = |u: f64| {
        if u <= 0.0 || u >= 1.0 {
            return 0.0;
        }
        let x = (pi * (u - 0.5)).tan();
        let jac = pi / (pi * (u - 0.5)).cos().powi(2);
        let v = f(x) * jac;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    adaptive_simpson(&mut g, 0.0, 1.0, tol)
}

/// Gauss-Legendre nodes and weights on `[0, 1]`, by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre_01(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; k];
    let mut ws = vec![0.0; k];
    for i in 0..k.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=k {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = k as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = 0.5 * (1.0 - x);
        xs[k - 1 - i] = 0.5 * (1.0 + x);
        ws[i] = 0.5 * w;
        ws[k - 1 - i] = 0.5 * w;
    }
    (xs, ws)
}

/// Tensorized integral of `f` over the unit cube at the given resolution
/// per axis.
pub fn tensor3_unit_cube(f: &dyn Fn(f64, f64, f64) -> f64, k: usize) -> f64 {
    let (xs, ws) = gauss_legendre_01(k);
    let mut total = 0.0;
    for (i1, &u1) in xs.iter().enumerate() {
        let mut plane = 0.0;
        for (i2, &u2) in xs.iter().enumerate() {
            let mut line = 0.0;
            for (i3, &u3) in xs.iter().enumerate() {
                line += ws[i3] * f(u1, u2, u3);
            }
            plane += ws[i2] * line;
        }
        total += ws[i1] * plane;
    }
    total
}

/// Adaptive tensor integration over the unit cube: the per-axis resolution
/// doubles until two consecutive estimates agree to the relative tolerance.
pub fn tensor3_adaptive(f: &dyn Fn(f64, f64, f64) -> f64, rel_tol: f64) -> f64 {
    let mut k = 40;
    let mut prev = tensor3_unit_cube(f, k);
    loop {
        k *= 2;
        let next = tensor3_unit_cube(f, k);
        if (next - prev).abs() <= rel_tol * next.abs() || k >= 320 {
            assert!(
                (next - prev).abs() <= rel_tol * next.abs(),
                "tensor quadrature failed to converge: {prev} vs {next} at k={k}"
            );
            return next;
        }
        prev = next;
    }
}

/// A seeded standard-normal dataset.
pub fn random_dataset(m: usize, n: usize, seed: u64) -> Dataset {
    let mut rng = RngStream::new(seed);
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    Dataset::from_rows(&rows).unwrap()
}

/// A seeded assignment with exactly `k` non-empty components.
pub fn random_assignment(m: usize, k: usize, seed: u64) -> Assignment {
    let mut rng = RngStream::new(seed);
    loop {
        let z: Vec<usize> = (0..m).map(|_| rng.below(k)).collect();
        if let Ok(a) = Assignment::new(z) {
            if a.k() == k {
                return a;
            }
        }
    }
}
