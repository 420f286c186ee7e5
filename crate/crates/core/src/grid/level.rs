use super::Field;

/// A straight piece of a level curve in the `(r, z)` half-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub p: (f64, f64),
    pub q: (f64, f64),
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.q.0 - self.p.0).hypot(self.q.1 - self.p.1)
    }
}

/// Marching-squares isoline `u = s`; saddle cells are resolved by the cell average.
pub fn level_segments(u: &Field, s: f64) -> Vec<Segment> {
    let g = u.grid();
    let mut out = Vec::new();
    for i in 0..g.nr {
        let (r0, r1) = (g.r(i), g.r(i + 1));
        for j in 0..g.nz {
            let (z0, z1) = (g.z(j), g.z(j + 1));
            // corners counter-clockwise from (r0, z0)
            let pts = [(r0, z0), (r1, z0), (r1, z1), (r0, z1)];
            let v = [u.at(i, j) - s, u.at(i + 1, j) - s, u.at(i + 1, j + 1) - s, u.at(i, j + 1) - s];
            let code = v.iter().enumerate().fold(0u8, |c, (k, &x)| c | (((x >= 0.0) as u8) << k));
            if code == 0 || code == 15 {
                continue;
            }
            let cross = |e: usize| {
                let (a, b) = (e, (e + 1) % 4);
                let t = v[a] / (v[a] - v[b]);
                (pts[a].0 + t * (pts[b].0 - pts[a].0), pts[a].1 + t * (pts[b].1 - pts[a].1))
            };
            let edges: Vec<usize> = (0..4).filter(|&e| (v[e] >= 0.0) != (v[(e + 1) % 4] >= 0.0)).collect();
            if edges.len() == 2 {
                out.push(Segment { p: cross(edges[0]), q: cross(edges[1]) });
            } else {
                let centre = 0.25 * v.iter().sum::<f64>();
                // pair each crossing with its neighbour around the corner that
                // disagrees with the centre
                if (centre >= 0.0) == (v[0] >= 0.0) {
                    out.push(Segment { p: cross(0), q: cross(1) });
                    out.push(Segment { p: cross(2), q: cross(3) });
                } else {
                    out.push(Segment { p: cross(3), q: cross(0) });
                    out.push(Segment { p: cross(1), q: cross(2) });
                }
            }
        }
    }
    out
}

/// `A(s)`: length of the isoline `u = s` weighted by `r^{n-2}` at segment midpoints.
pub fn level_area(u: &Field, s: f64) -> f64 {
    let m = (u.grid().dim - 2) as i32;
    level_segments(u, s).iter().map(|seg| seg.length() * (0.5 * (seg.p.0 + seg.q.0)).powi(m)).sum()
}
