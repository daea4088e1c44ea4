//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;

/// Offsets (dr, dc) of the closed disk of radius `r`.
pub fn disk(r: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for dr in -r..=r {
        for dc in -r..=r {
            if dr * dr + dc * dc <= r * r {
                out.push((dr, dc));
            }
        }
    }
    out
}

/// Row-major grid of booleans.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<bool>,
}

impl Grid {
    pub fn at(&self, r: i64, c: i64) -> Option<bool> {
        if r < 0 || c < 0 || r >= self.rows as i64 || c >= self.cols as i64 {
            None
        } else {
            Some(self.cells[r as usize * self.cols + c as usize])
        }
    }

    fn map(&self, f: impl Fn(i64, i64) -> bool) -> Grid {
        let mut cells = Vec::with_capacity(self.cells.len());
        for r in 0..self.rows as i64 {
            for c in 0..self.cols as i64 {
                cells.push(f(r, c));
            }
        }
        Grid {
            rows: self.rows,
            cols: self.cols,
            cells,
        }
    }
}

/// Pixels outside the grid count as foreground.
pub fn erode(g: &Grid, r: i64) -> Grid {
    let se = disk(r);
    g.map(|y, x| {
        se.iter()
            .all(|&(dy, dx)| g.at(y + dy, x + dx).unwrap_or(true))
    })
}

/// Pixels outside the grid count as background.
pub fn dilate(g: &Grid, r: i64) -> Grid {
    let se = disk(r);
    g.map(|y, x| {
        se.iter()
            .any(|&(dy, dx)| g.at(y + dy, x + dx).unwrap_or(false))
    })
}

pub fn open(g: &Grid, r: i64) -> Grid {
    dilate(&erode(g, r), r)
}

pub fn close(g: &Grid, r: i64) -> Grid {
    erode(&dilate(g, r), r)
}

/// Breadth-first labelling; keeps components with more than
/// `frac * rows * cols` pixels.
pub fn keep_large_components(g: &Grid, frac: f64, eight: bool) -> Grid {
    let mut label = vec![usize::MAX; g.cells.len()];
    let mut sizes = Vec::new();
    let mut steps = vec![(-1i64, 0i64), (1, 0), (0, -1), (0, 1)];
    if eight {
        steps.extend([(-1, -1), (-1, 1), (1, -1), (1, 1)]);
    }
    for start in 0..g.cells.len() {
        if !g.cells[start] || label[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut size = 0;
        let mut queue = VecDeque::from([start]);
        label[start] = id;
        while let Some(p) = queue.pop_front() {
            size += 1;
            let (r, c) = ((p / g.cols) as i64, (p % g.cols) as i64);
            for (dr, dc) in &steps {
                if g.at(r + dr, c + dc) == Some(true) {
                    let q = (r + dr) as usize * g.cols + (c + dc) as usize;
                    if label[q] == usize::MAX {
                        label[q] = id;
                        queue.push_back(q);
                    }
                }
            }
        }
        sizes.push(size);
    }
    let min = frac * (g.rows * g.cols) as f64;
    Grid {
        rows: g.rows,
        cols: g.cols,
        cells: label
            .iter()
            .map(|&l| l != usize::MAX && sizes[l] as f64 > min)
            .collect(),
    }
}

/// Mann-Whitney AUC by enumerating every (positive, negative) pair.
pub fn pair_count_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut total = 0.0;
    let mut pairs = 0usize;
    for (i, &li) in labels.iter().enumerate() {
        if !li {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            pairs += 1;
            total += if scores[i] > scores[j] {
                1.0
            } else if scores[i] == scores[j] {
                0.5
            } else {
                0.0
            };
        }
    }
    total / pairs as f64
}

/// Area under a polyline by the trapezoid rule.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| (xs[1] - xs[0]) * (ys[0] + ys[1]) / 2.0)
        .sum()
}

/// Supremum ECDF gap, evaluated at every pooled sample point by counting.
pub fn ecdf_gap(a: &[f64], b: &[f64]) -> f64 {
    let mut d: f64 = 0.0;
    for &x in a.iter().chain(b) {
        let fa = a.iter().filter(|&&v| v <= x).count() as f64 / a.len() as f64;
        let fb = b.iter().filter(|&&v| v <= x).count() as f64 / b.len() as f64;
        d = d.max((fa - fb).abs());
    }
    d
}

/// P(K > lambda) from the alternating series alone, summed until the
/// terms vanish.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut k = 1u64;
    loop {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 || k > 10_000_000 {
            break;
        }
        k += 1;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
