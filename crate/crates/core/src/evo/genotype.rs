use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::sim::PayloadSpec;
use crate::Vec2;

/// One bit per perimeter node; a set bit tethers a robot to that node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Genotype {
    pub bits: Vec<bool>,
    /// Node spacing in degrees, stored in hundredths so the type stays `Eq`.
    alpha_centideg: u32,
}

impl Genotype {
    /// All-zero genotype with `360 / alpha_node` bits.
    pub fn zeros(alpha_node: f64) -> Result<Self> {
        let m = node_count(alpha_node)?;
        Ok(Self {
            bits: vec![false; m],
            alpha_centideg: (alpha_node * 100.0).round() as u32,
        })
    }

    pub fn from_nodes(alpha_node: f64, nodes: &[usize]) -> Result<Self> {
        let mut g = Self::zeros(alpha_node)?;
        for &j in nodes {
            ensure(j < g.bits.len(), "nodes", "node index out of range")?;
            g.bits[j] = true;
        }
        Ok(g)
    }

    pub fn from_bits(alpha_node: f64, bits: Vec<bool>) -> Result<Self> {
        let g = Self::zeros(alpha_node)?;
        ensure(bits.len() == g.bits.len(), "bits", "length must equal 360 / alpha_node")?;
        Ok(Self { bits, ..g })
    }

    pub fn random<R: Rng + ?Sized>(alpha_node: f64, rng: &mut R) -> Result<Self> {
        let mut g = Self::zeros(alpha_node)?;
        g.bits.iter_mut().for_each(|b| *b = rng.random_bool(0.5));
        Ok(g)
    }

    pub fn alpha_node(&self) -> f64 {
        self.alpha_centideg as f64 / 100.0
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn robot_count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn nodes(&self) -> Vec<usize> {
        (0..self.bits.len()).filter(|&j| self.bits[j]).collect()
    }

    /// Bits as a `0`/`1` string, node 0 first.
    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

fn node_count(alpha_node: f64) -> Result<usize> {
    ensure(alpha_node > 0.0, "alpha_node", "must be positive")?;
    let m = (360.0 / alpha_node).round();
    ensure(
        m >= 1.0 && (m * alpha_node - 360.0).abs() < 1e-9,
        "alpha_node",
        "must divide 360 exactly",
    )?;
    Ok(m as usize)
}

/// Decoded attachment layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttachmentConfig {
    pub nodes: Vec<usize>,
    pub angles_deg: Vec<f64>,
    /// Body-frame points on the payload perimeter.
    pub points: Vec<Vec2>,
}

impl AttachmentConfig {
    pub fn robot_count(&self) -> usize {
        self.nodes.len()
    }

    /// A layout without robots cannot move anything.
    pub fn is_feasible(&self) -> bool {
        !self.nodes.is_empty()
    }
}

/// Node `j` maps to perimeter angle `j · alpha_node`.
pub fn decode(g: &Genotype, payload: &PayloadSpec) -> AttachmentConfig {
    let nodes = g.nodes();
    let angles_deg: Vec<f64> = nodes.iter().map(|&j| j as f64 * g.alpha_node()).collect();
    let points = angles_deg
        .iter()
        .map(|a| {
            let a = a.to_radians();
            Vec2::new(payload.disk_radius * a.cos(), payload.disk_radius * a.sin())
        })
        .collect();
    AttachmentConfig {
        nodes,
        angles_deg,
        points,
    }
}

fn orient(a: &Vec2, b: &Vec2, c: &Vec2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// True when any two tether chords (anchor `i` → robot `i`) cross at a point
/// interior to both segments.
pub fn tethers_cross(anchors: &[Vec2], robots: &[Vec2]) -> bool {
    let n = anchors.len().min(robots.len());
    for i in 0..n {
        for j in i + 1..n {
            let (p1, p2, q1, q2) = (&anchors[i], &robots[i], &anchors[j], &robots[j]);
            let d1 = orient(q1, q2, p1);
            let d2 = orient(q1, q2, p2);
            let d3 = orient(p1, p2, q1);
            let d4 = orient(p1, p2, q2);
            if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
                return true;
            }
        }
    }
    false
}
