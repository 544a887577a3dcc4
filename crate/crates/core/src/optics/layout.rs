use super::OpticsError;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::{Add, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn polar(radius: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self { x: radius * c, y: radius * s }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Positions of the transmit beam axes and receive apertures, all in metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApertureLayout {
    pub tx_centers: Vec<Vec2>,
    pub rx_centers: Vec<Vec2>,
    pub rx_radius: f64,
}

/// Centre element plus rings of 6, 12, 18, ... at multiples of `pitch`.
/// A partially filled outer ring is spread uniformly in angle.
fn ring_positions(n: usize, pitch: f64) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(Vec2::ZERO);
    let mut ring = 1;
    while out.len() < n {
        let count = (6 * ring).min(n - out.len());
        for j in 0..count {
            out.push(Vec2::polar(ring as f64 * pitch, 2.0 * PI * j as f64 / count as f64));
        }
        ring += 1;
    }
    out
}

fn rings_needed(n: usize) -> usize {
    let (mut placed, mut ring) = (1, 0);
    while placed < n {
        ring += 1;
        placed += 6 * ring;
    }
    ring
}

impl ApertureLayout {
    /// Concentric-ring packing for both arrays.
    ///
    /// Transmit apertures are disks of radius `waist` whose union lies inside
    /// R0 = √N_T·w, so the outer ring sits at R0 − w. Receive apertures of radius
    /// `rx_radius` are spaced so neighbours touch.
    pub fn concentric(n_tx: usize, n_rx: usize, waist: f64, rx_radius: f64) -> Self {
        let r0 = (n_tx as f64).sqrt() * waist;
        let tx_rings = rings_needed(n_tx);
        let tx_pitch = if tx_rings == 0 { 0.0 } else { (r0 - waist).max(0.0) / tx_rings as f64 };
        Self {
            tx_centers: ring_positions(n_tx, tx_pitch),
            rx_centers: ring_positions(n_rx, 2.0 * rx_radius),
            rx_radius,
        }
    }

    pub fn n_tx(&self) -> usize {
        self.tx_centers.len()
    }

    pub fn n_rx(&self) -> usize {
        self.rx_centers.len()
    }

    pub fn validate(&self, aperture_radius: f64) -> Result<(), OpticsError> {
        if self.tx_centers.is_empty() || self.rx_centers.is_empty() {
            return Err(OpticsError::Geometry("layout needs at least one transmitter and receiver".into()));
        }
        if !(self.rx_radius > 0.0) {
            return Err(OpticsError::InvalidParameter { name: "rx_radius", value: self.rx_radius });
        }
        for (j, t) in self.tx_centers.iter().enumerate() {
            if t.norm() > aperture_radius * (1.0 + 1e-9) {
                return Err(OpticsError::Geometry(format!(
                    "transmitter {j} at radius {:.4} m lies outside R0 = {aperture_radius:.4} m",
                    t.norm()
                )));
            }
        }
        for i in 0..self.rx_centers.len() {
            for k in i + 1..self.rx_centers.len() {
                let d = (self.rx_centers[i] - self.rx_centers[k]).norm();
                if d < 2.0 * self.rx_radius * (1.0 - 1e-9) {
                    return Err(OpticsError::Geometry(format!(
                        "receive apertures {i} and {k} overlap (centre spacing {d:.4} m)"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Largest distance between any receive centre and any transmit axis.
    pub fn max_pair_distance(&self) -> f64 {
        self.rx_centers
            .iter()
            .flat_map(|c| self.tx_centers.iter().map(move |t| (*c - *t).norm()))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_counts() {
        assert_eq!(rings_needed(1), 0);
        assert_eq!(rings_needed(7), 1);
        assert_eq!(rings_needed(8), 2);
        assert_eq!(rings_needed(19), 2);
        assert_eq!(rings_needed(32), 3);
    }

    #[test]
    fn concentric_layouts_are_valid() {
        for n in [1, 2, 4, 8, 16, 32, 64] {
            let l = ApertureLayout::concentric(n, n, 0.035, 0.2);
            assert_eq!(l.n_tx(), n);
            assert_eq!(l.n_rx(), n);
            let r0 = (n as f64).sqrt() * 0.035;
            l.validate(r0).unwrap();
            // every transmit disk of radius w fits inside R0
            for t in &l.tx_centers {
                assert!(t.norm() + 0.035 <= r0 + 1e-12);
            }
        }
    }

    #[test]
    fn adjacent_receivers_touch() {
        let l = ApertureLayout::concentric(7, 7, 0.035, 0.2);
        let d = (l.rx_centers[0] - l.rx_centers[1]).norm();
        assert!((d - 0.4).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_bad_layouts() {
        let mut l = ApertureLayout::concentric(4, 4, 0.035, 0.2);
        l.rx_centers[1] = Vec2::new(0.1, 0.0);
        assert!(l.validate(0.07).is_err());
        let mut l = ApertureLayout::concentric(4, 4, 0.035, 0.2);
        l.tx_centers[0] = Vec2::new(1.0, 0.0);
        assert!(l.validate(0.07).is_err());
    }
}
