use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::gridio::{read_grid, write_grid};
use crate::Vec2;

/// Row-major height grid. Cell `(r, c)` is centred at
/// `origin + cell_size · (c, r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heightmap {
    pub heights: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    pub cell_size: f64,
    pub origin: Vec2,
}

impl Heightmap {
    pub fn new(heights: Vec<f64>, rows: usize, cols: usize, cell_size: f64, origin: Vec2) -> Result<Self> {
        let hm = Self {
            heights,
            rows,
            cols,
            cell_size,
            origin,
        };
        hm.validate()?;
        Ok(hm)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.rows >= 2 && self.cols >= 2, "heightmap", "grid must be at least 2x2")?;
        ensure(self.cell_size > 0.0, "cell_size", "must be positive")?;
        if self.heights.len() != self.rows * self.cols {
            return Err(Error::SizeMismatch(format!(
                "{} heights for a {}x{} grid",
                self.heights.len(),
                self.rows,
                self.cols
            )));
        }
        ensure(self.heights.iter().all(|h| h.is_finite()), "heights", "must be finite")
    }

    pub fn flat(rows: usize, cols: usize, cell_size: f64) -> Result<Self> {
        Self::new(vec![0.0; rows * cols], rows, cols, cell_size, Vec2::zeros())
    }

    /// Build from `h(x, y)` sampled at cell centres.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        cell_size: f64,
        origin: Vec2,
        h: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut heights = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                heights.push(h(
                    origin.x + c as f64 * cell_size,
                    origin.y + r as f64 * cell_size,
                ));
            }
        }
        Self::new(heights, rows, cols, cell_size, origin)
    }

    /// 16 m × 16 m at 0.25 m: two steep ridges along y at x = 4 m and
    /// x = 12 m, with a gently rising, slightly undulating corridor between.
    pub fn two_ridge() -> Self {
        let ridge = |x: f64, x0: f64| 3.0 * (-(x - x0).powi(2) / (2.0 * 0.5f64.powi(2))).exp();
        Self::from_fn(64, 64, 0.25, Vec2::zeros(), |x, y| {
            ridge(x, 4.0) + ridge(x, 12.0) + 0.15 * y + 0.1 * (0.8 * x).sin() * (0.5 * y).cos()
        })
        .expect("fixed geometry is valid")
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.heights[r * self.cols + c]
    }

    pub fn cell_centre(&self, r: usize, c: usize) -> Vec2 {
        self.origin + self.cell_size * Vec2::new(c as f64, r as f64)
    }

    /// Cell containing `p`, if inside the map.
    pub fn cell_of(&self, p: &Vec2) -> Option<(usize, usize)> {
        let c = ((p.x - self.origin.x) / self.cell_size + 0.5).floor();
        let r = ((p.y - self.origin.y) / self.cell_size + 0.5).floor();
        if c < 0.0 || r < 0.0 || c >= self.cols as f64 || r >= self.rows as f64 {
            None
        } else {
            Some((r as usize, c as usize))
        }
    }

    /// CSV (any extension but `.pgm`) or 16-bit PGM.
    pub fn load(path: &Path) -> Result<Self> {
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) {
            let mut bytes = Vec::new();
            File::open(path)?.read_to_end(&mut bytes)?;
            Self::from_pgm(&bytes, path)
        } else {
            Self::read_csv(BufReader::new(File::open(path)?), path)
        }
    }

    pub fn read_csv<R: std::io::BufRead>(input: R, path: &Path) -> Result<Self> {
        let grid = read_grid(input, path)?;
        let cell_size = grid.meta_f64("cell_size", path)?.ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            column: 1,
            message: "missing `# cell_size=` header".into(),
        })?;
        let origin = Vec2::new(
            grid.meta_f64("origin_x", path)?.unwrap_or(0.0),
            grid.meta_f64("origin_y", path)?.unwrap_or(0.0),
        );
        Self::new(grid.values, grid.rows, grid.cols, cell_size, origin)
    }

    /// `# cell_size=.. origin_x=.. origin_y=..` then one line per row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_grid(
            out,
            &[
                ("cell_size", self.cell_size.to_string()),
                ("origin_x", self.origin.x.to_string()),
                ("origin_y", self.origin.y.to_string()),
            ],
            self.cols,
            &self.heights,
        )
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Binary PGM. Header comments carry `vertical_scale`, `cell_size`,
    /// `origin_x`, `origin_y` and `base`; height = `base + vertical_scale ·
    /// pixel / maxval`. File row 0 is grid row 0.
    pub fn from_pgm(bytes: &[u8], path: &Path) -> Result<Self> {
        let mut p = PgmReader {
            bytes,
            pos: 0,
            line: 1,
            path,
            meta: Vec::new(),
        };
        let magic = p.token()?;
        if magic != "P5" {
            return Err(p.err(format!("expected P5 magic, found {magic:?}")));
        }
        let cols = p.number()?;
        let rows = p.number()?;
        let maxval = p.number()?;
        if maxval == 0 || maxval > 65535 {
            return Err(p.err(format!("maxval {maxval} outside 1..=65535")));
        }
        // exactly one whitespace byte separates header and raster
        p.pos += 1;
        let wide = maxval > 255;
        let need = rows * cols * if wide { 2 } else { 1 };
        let raster = &bytes[p.pos.min(bytes.len())..];
        if raster.len() < need {
            return Err(p.err(format!("raster has {} bytes, expected {need}", raster.len())));
        }
        let meta = |key: &str| -> Option<f64> {
            p.meta
                .iter()
                .find(|(k, _)| k == key)
                .and_then(|(_, v)| v.parse().ok())
        };
        let scale = meta("vertical_scale")
            .ok_or_else(|| p.err("missing `# vertical_scale=` comment".into()))?;
        let cell_size = meta("cell_size").ok_or_else(|| p.err("missing `# cell_size=` comment".into()))?;
        let base = meta("base").unwrap_or(0.0);
        let origin = Vec2::new(meta("origin_x").unwrap_or(0.0), meta("origin_y").unwrap_or(0.0));
        let heights = (0..rows * cols)
            .map(|i| {
                let v = if wide {
                    u16::from_be_bytes([raster[2 * i], raster[2 * i + 1]]) as f64
                } else {
                    raster[i] as f64
                };
                base + scale * v / maxval as f64
            })
            .collect();
        Self::new(heights, rows, cols, cell_size, origin)
    }

    /// Quantise to 16 bits over the height range of the map.
    pub fn to_pgm(&self) -> Vec<u8> {
        let lo = self.heights.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.heights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scale = if hi > lo { hi - lo } else { 1.0 };
        let mut out = format!(
            "P5\n# vertical_scale={scale}\n# base={lo}\n# cell_size={}\n# origin_x={}\n# origin_y={}\n{} {}\n65535\n",
            self.cell_size, self.origin.x, self.origin.y, self.cols, self.rows
        )
        .into_bytes();
        for h in &self.heights {
            let v = ((h - lo) / scale * 65535.0).round().clamp(0.0, 65535.0) as u16;
            out.extend_from_slice(&v.to_be_bytes());
        }
        out
    }
}

struct PgmReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    path: &'a Path,
    meta: Vec<(String, String)>,
}

impl PgmReader<'_> {
    fn err(&self, message: String) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line: self.line,
            column: 0,
            message,
        }
    }

    /// Next header token, collecting `key=value` pairs from comments.
    fn token(&mut self) -> Result<String> {
        loop {
            match self.bytes.get(self.pos) {
                None => return Err(self.err("truncated header".into())),
                Some(b'#') => {
                    let start = self.pos + 1;
                    while self.bytes.get(self.pos).is_some_and(|b| *b != b'\n') {
                        self.pos += 1;
                    }
                    let text = String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned();
                    for kv in text.split_whitespace() {
                        if let Some((k, v)) = kv.split_once('=') {
                            self.meta.push((k.to_string(), v.to_string()));
                        }
                    }
                }
                Some(b) if b.is_ascii_whitespace() => {
                    if *b == b'\n' {
                        self.line += 1;
                    }
                    self.pos += 1;
                }
                Some(_) => break,
            }
        }
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|b| !b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        Ok(String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> Result<usize> {
        let t = self.token()?;
        t.parse()
            .map_err(|_| self.err(format!("expected a number, found {t:?}")))
    }
}

/// Cells whose terrain is too steep to traverse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleMask {
    pub blocked: Vec<bool>,
    pub rows: usize,
    pub cols: usize,
    pub cell_size: f64,
    pub origin: Vec2,
    pub grad_threshold: f64,
}

impl ObstacleMask {
    pub fn empty_like(hm: &Heightmap) -> Self {
        Self {
            blocked: vec![false; hm.rows * hm.cols],
            rows: hm.rows,
            cols: hm.cols,
            cell_size: hm.cell_size,
            origin: hm.origin,
            grad_threshold: f64::INFINITY,
        }
    }

    pub fn is_blocked(&self, r: usize, c: usize) -> bool {
        self.blocked[r * self.cols + c]
    }

    pub fn set_blocked(&mut self, r: usize, c: usize, v: bool) {
        self.blocked[r * self.cols + c] = v;
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|b| **b).count()
    }

    /// Lower-left and upper-right corners of the mapped area.
    pub fn bounds(&self) -> (Vec2, Vec2) {
        let half = Vec2::repeat(0.5 * self.cell_size);
        let lo = self.origin - half;
        let hi = self.origin + self.cell_size * Vec2::new(self.cols as f64, self.rows as f64) - half;
        (lo, hi)
    }

    fn cell_box(&self, r: usize, c: usize) -> (Vec2, Vec2) {
        let centre = self.origin + self.cell_size * Vec2::new(c as f64, r as f64);
        let half = Vec2::repeat(0.5 * self.cell_size);
        (centre - half, centre + half)
    }

    /// Blocked cells whose squares may come within `radius` of the box
    /// `[lo, hi]`. Cells outside the grid are skipped.
    fn cells_near(&self, lo: Vec2, hi: Vec2, radius: f64) -> impl Iterator<Item = (usize, usize)> + '_ {
        let idx = |v: f64, o: f64| ((v - o) / self.cell_size + 0.5).floor();
        let c0 = idx(lo.x - radius, self.origin.x).max(0.0) as usize;
        let r0 = idx(lo.y - radius, self.origin.y).max(0.0) as usize;
        let c1 = idx(hi.x + radius, self.origin.x).min(self.cols as f64 - 1.0);
        let r1 = idx(hi.y + radius, self.origin.y).min(self.rows as f64 - 1.0);
        let (c1, r1) = (c1.max(-1.0) as isize, r1.max(-1.0) as isize);
        (r0 as isize..=r1)
            .flat_map(move |r| (c0 as isize..=c1).map(move |c| (r as usize, c as usize)))
            .filter(|&(r, c)| self.is_blocked(r, c))
    }

    fn inside(&self, p: &Vec2, radius: f64) -> bool {
        let (lo, hi) = self.bounds();
        p.x - radius >= lo.x && p.y - radius >= lo.y && p.x + radius <= hi.x && p.y + radius <= hi.y
    }

    /// A disk of `radius` at `p` lies inside the map and touches no blocked
    /// cell.
    pub fn disk_free(&self, p: &Vec2, radius: f64) -> bool {
        if !self.inside(p, radius) {
            return false;
        }
        self.cells_near(*p, *p, radius).all(|(r, c)| {
            let (lo, hi) = self.cell_box(r, c);
            point_box_distance(p, &lo, &hi) > radius
        })
    }

    /// The disk swept from `a` to `b` stays inside the map and touches no
    /// blocked cell.
    pub fn capsule_free(&self, a: &Vec2, b: &Vec2, radius: f64) -> bool {
        if !self.inside(a, radius) || !self.inside(b, radius) {
            return false;
        }
        let lo = a.inf(b);
        let hi = a.sup(b);
        self.cells_near(lo, hi, radius).all(|(r, c)| {
            let (blo, bhi) = self.cell_box(r, c);
            segment_box_distance(a, b, &blo, &bhi) > radius
        })
    }

    /// 0/1 grid with the same header as a heightmap CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let values: Vec<f64> = self.blocked.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        write_grid(
            out,
            &[
                ("cell_size", self.cell_size.to_string()),
                ("origin_x", self.origin.x.to_string()),
                ("origin_y", self.origin.y.to_string()),
                ("grad_threshold", self.grad_threshold.to_string()),
            ],
            self.cols,
            &values,
        )
    }

    /// Labels of the 4-connected components of free cells; blocked cells get
    /// `usize::MAX`.
    pub(crate) fn free_components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.blocked.len()];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..self.blocked.len() {
            if self.blocked[start] || label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            stack.push(start);
            while let Some(i) = stack.pop() {
                let (r, c) = (i / self.cols, i % self.cols);
                let mut visit = |rr: usize, cc: usize| {
                    let j = rr * self.cols + cc;
                    if !self.blocked[j] && label[j] == usize::MAX {
                        label[j] = next;
                        stack.push(j);
                    }
                };
                if r > 0 {
                    visit(r - 1, c);
                }
                if r + 1 < self.rows {
                    visit(r + 1, c);
                }
                if c > 0 {
                    visit(r, c - 1);
                }
                if c + 1 < self.cols {
                    visit(r, c + 1);
                }
            }
            next += 1;
        }
        label
    }

    pub(crate) fn cell_of(&self, p: &Vec2) -> Option<(usize, usize)> {
        let c = ((p.x - self.origin.x) / self.cell_size + 0.5).floor();
        let r = ((p.y - self.origin.y) / self.cell_size + 0.5).floor();
        if c < 0.0 || r < 0.0 || c >= self.cols as f64 || r >= self.rows as f64 {
            None
        } else {
            Some((r as usize, c as usize))
        }
    }
}

fn point_box_distance(p: &Vec2, lo: &Vec2, hi: &Vec2) -> f64 {
    let dx = (lo.x - p.x).max(0.0).max(p.x - hi.x);
    let dy = (lo.y - p.y).max(0.0).max(p.y - hi.y);
    dx.hypot(dy)
}

fn point_segment_distance(p: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p - (a + t * ab)).norm()
}

fn segments_intersect(a: &Vec2, b: &Vec2, c: &Vec2, d: &Vec2) -> bool {
    let orient = |p: &Vec2, q: &Vec2, r: &Vec2| (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0 && {
        // collinear case: require overlapping extents
        let overlap = |p: f64, q: f64, r: f64, s: f64| p.min(q) <= r.max(s) && r.min(s) <= p.max(q);
        overlap(a.x, b.x, c.x, d.x) && overlap(a.y, b.y, c.y, d.y)
    }
}

fn segment_box_distance(a: &Vec2, b: &Vec2, lo: &Vec2, hi: &Vec2) -> f64 {
    let inside = |p: &Vec2| p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    if inside(a) || inside(b) {
        return 0.0;
    }
    let corners = [
        Vec2::new(lo.x, lo.y),
        Vec2::new(hi.x, lo.y),
        Vec2::new(hi.x, hi.y),
        Vec2::new(lo.x, hi.y),
    ];
    let mut best = f64::INFINITY;
    for k in 0..4 {
        let (c, d) = (&corners[k], &corners[(k + 1) % 4]);
        if segments_intersect(a, b, c, d) {
            return 0.0;
        }
        best = best
            .min(point_segment_distance(a, c, d))
            .min(point_segment_distance(b, c, d))
            .min(point_segment_distance(c, a, b));
    }
    best
}

/// Mark cells whose central-difference slope magnitude exceeds `grad_threshold`.
/// Border cells use one-sided differences.
pub fn gradient_obstacles(hm: &Heightmap, grad_threshold: f64) -> Result<ObstacleMask> {
    hm.validate()?;
    ensure(grad_threshold > 0.0, "grad_threshold", "must be positive")?;
    let mut mask = ObstacleMask::empty_like(hm);
    mask.grad_threshold = grad_threshold;
    let h = hm.cell_size;
    let diff = |lo: f64, hi: f64, span: usize| (hi - lo) / (span as f64 * h);
    for r in 0..hm.rows {
        for c in 0..hm.cols {
            let (c0, c1) = (c.saturating_sub(1), (c + 1).min(hm.cols - 1));
            let (r0, r1) = (r.saturating_sub(1), (r + 1).min(hm.rows - 1));
            let gx = diff(hm.at(r, c0), hm.at(r, c1), c1 - c0);
            let gy = diff(hm.at(r0, c), hm.at(r1, c), r1 - r0);
            mask.set_blocked(r, c, gx.hypot(gy) > grad_threshold);
        }
    }
    Ok(mask)
}
