//! Gabriel graph edges by a grid search with an angular stopping rule.

use std::f64::consts::{PI, TAU};

use crate::graph::Point;

const BINS: usize = 96;

/// `c` lies strictly inside the disk with diameter `ab`.
#[inline]
pub fn blocks(a: Point, b: Point, c: Point) -> bool {
    (a.x - c.x) * (b.x - c.x) + (a.y - c.y) * (b.y - c.y) < 0.0
}

/// All Gabriel pairs `(i, j)` with `i < j` by the O(n³) definition.
pub fn gabriel_brute(pts: &[Point]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if !(0..pts.len()).any(|k| k != i && k != j && blocks(pts[i], pts[j], pts[k])) {
                out.push((i, j));
            }
        }
    }
    out
}

struct Grid {
    min: Point,
    cell: f64,
    w: usize,
    h: usize,
    cells: Vec<Vec<u32>>,
}

impl Grid {
    fn new(pts: &[Point]) -> Grid {
        let (mut lo, mut hi) = (Point::new(f64::MAX, f64::MAX), Point::new(f64::MIN, f64::MIN));
        for p in pts {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-9);
        let side = ((pts.len() as f64 / 2.0).sqrt().ceil() as usize).max(1);
        let cell = span / side as f64 * (1.0 + 1e-9);
        let w = (((hi.x - lo.x) / cell) as usize + 1).max(1);
        let h = (((hi.y - lo.y) / cell) as usize + 1).max(1);
        let mut cells = vec![Vec::new(); w * h];
        for (i, p) in pts.iter().enumerate() {
            let (cx, cy) = ((((p.x - lo.x) / cell) as usize).min(w - 1), (((p.y - lo.y) / cell) as usize).min(h - 1));
            cells[cy * w + cx].push(i as u32);
        }
        Grid {
            min: lo,
            cell,
            w,
            h,
            cells,
        }
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        (
            (((p.x - self.min.x) / self.cell) as usize).min(self.w - 1),
            (((p.y - self.min.y) / self.cell) as usize).min(self.h - 1),
        )
    }

    /// Points in the cells at Chebyshev distance exactly `r` from `(cx, cy)`.
    fn ring(&self, cx: usize, cy: usize, r: usize, out: &mut Vec<u32>) {
        let (cx, cy, r) = (cx as i64, cy as i64, r as i64);
        for y in cy - r..=cy + r {
            if y < 0 || y >= self.h as i64 {
                continue;
            }
            let edge = y == cy - r || y == cy + r;
            let step = if edge || r == 0 { 1 } else { (2 * r) as usize };
            let mut x = cx - r;
            while x <= cx + r {
                if x >= 0 && x < self.w as i64 {
                    out.extend_from_slice(&self.cells[(y * self.w as i64 + x) as usize]);
                }
                x += step as i64;
            }
        }
    }
}

/// Largest distance from `a` to the box boundary over ray directions in `[t0, t1]`.
fn exit_reach(a: Point, lo: Point, hi: Point, t0: f64, t1: f64) -> f64 {
    let reach = |t: f64| {
        let (dx, dy) = (t.cos(), t.sin());
        let tx = if dx > 1e-12 {
            (hi.x - a.x) / dx
        } else if dx < -1e-12 {
            (lo.x - a.x) / dx
        } else {
            f64::INFINITY
        };
        let ty = if dy > 1e-12 {
            (hi.y - a.y) / dy
        } else if dy < -1e-12 {
            (lo.y - a.y) / dy
        } else {
            f64::INFINITY
        };
        tx.min(ty)
    };
    let mut m = reach(t0).max(reach(t1));
    for c in [Point::new(lo.x, lo.y), Point::new(hi.x, lo.y), Point::new(lo.x, hi.y), Point::new(hi.x, hi.y)] {
        let mut t = (c.y - a.y).atan2(c.x - a.x);
        if t < t0 {
            t += TAU;
        }
        if t <= t1 {
            m = m.max(reach(t));
        }
    }
    m
}

/// Gabriel pairs `(i, j)`, `i < j`, sorted.
pub fn gabriel_edges(pts: &[Point]) -> Vec<(usize, usize)> {
    let n = pts.len();
    if n < 2 {
        return Vec::new();
    }
    let grid = Grid::new(pts);
    let lo = grid.min;
    let hi = pts.iter().fold(lo, |m, p| Point::new(m.x.max(p.x), m.y.max(p.y)));
    let max_ring = grid.w.max(grid.h);
    let mut out = Vec::new();
    let mut seen: Vec<u32> = Vec::new();
    let mut ring: Vec<u32> = Vec::new();
    for a in 0..n {
        let pa = pts[a];
        let (cx, cy) = grid.cell_of(pa);
        seen.clear();
        let mut tested = 0usize;
        let mut r = 0;
        loop {
            ring.clear();
            grid.ring(cx, cy, r, &mut ring);
            seen.extend(ring.iter().copied().filter(|&i| i as usize != a));
            let done = r >= max_ring;
            // every point closer than `radius` has been seen
            let radius = if done { f64::INFINITY } else { r as f64 * grid.cell };
            seen.sort_by(|&x, &y| pa.dist(pts[x as usize]).total_cmp(&pa.dist(pts[y as usize])));
            let upto = seen.partition_point(|&i| pa.dist(pts[i as usize]) < radius);
            // candidates inside the radius are decidable since their disks hold only seen points;
            // the prefix below `tested` was decided in earlier rounds
            for &b in &seen[tested..upto] {
                if (b as usize) < a {
                    continue;
                }
                let pb = pts[b as usize];
                let rb = pa.dist(pb);
                let blocked = seen
                    .iter()
                    .take_while(|&&c| pa.dist(pts[c as usize]) < rb)
                    .any(|&c| c != b && blocks(pa, pb, pts[c as usize]));
                if !blocked {
                    out.push((a, b as usize));
                }
            }
            tested = upto;
            if done || covered(pa, pts, &seen[..upto], radius, lo, hi) {
                break;
            }
            r += 1;
        }
    }
    out.sort_unstable();
    out
}

/// Every direction from `a` is either blocked beyond `radius` by some seen point or leaves the box.
fn covered(a: Point, pts: &[Point], seen: &[u32], radius: f64, lo: Point, hi: Point) -> bool {
    let mut cov = [false; BINS];
    let width = TAU / BINS as f64;
    for (i, c) in cov.iter_mut().enumerate() {
        let t0 = -PI + i as f64 * width;
        if exit_reach(a, lo, hi, t0, t0 + width) < radius {
            *c = true;
        }
    }
    for &s in seen {
        let p = pts[s as usize];
        let rho = a.dist(p);
        if rho >= radius || rho == 0.0 {
            continue;
        }
        let half = (rho / radius).acos();
        let theta = (p.y - a.y).atan2(p.x - a.x);
        let (s0, s1) = (theta - half, theta + half);
        for (i, c) in cov.iter_mut().enumerate() {
            if *c {
                continue;
            }
            let t0 = -PI + i as f64 * width;
            let t1 = t0 + width;
            // the bin, shifted by whole turns, must sit inside the open interval
            for k in [-1.0, 0.0, 1.0] {
                let (b0, b1) = (t0 + k * TAU, t1 + k * TAU);
                if b0 > s0 + 1e-12 && b1 < s1 - 1e-12 {
                    *c = true;
                    break;
                }
            }
        }
    }
    cov.iter().all(|&c| c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pair_and_collinear() {
        assert_eq!(gabriel_edges(&[Point::new(0.0, 0.0), Point::new(5.0, 1.0)]), vec![(0, 1)]);
        let line = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)];
        assert_eq!(gabriel_edges(&line), vec![(0, 1), (1, 2)]);
        assert_eq!(gabriel_brute(&line), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn matches_definition_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [3, 10, 40, 150, 300] {
            let pts: Vec<Point> = (0..n)
                .map(|_| Point::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)))
                .collect();
            assert_eq!(gabriel_edges(&pts), gabriel_brute(&pts), "n = {n}");
        }
        // clustered input stresses the stopping rule
        let pts: Vec<Point> = (0..200)
            .map(|i| {
                let c = if i % 2 == 0 { 10.0 } else { 90.0 };
                Point::new(c + rng.random_range(0.0..5.0), rng.random_range(0.0..100.0))
            })
            .collect();
        assert_eq!(gabriel_edges(&pts), gabriel_brute(&pts));
    }
}
