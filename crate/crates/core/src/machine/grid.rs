use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::layout::{ZoneLayout, CORRIDOR_MARGIN};
use super::params::{PhysParams, INTERACTION_OFFSET};
use crate::error::CapacityError;
use crate::geometry::{Point, Rect, EPS};

const LARGE_SQUARE_PITCH: f64 = 15.0;
const SMALL_SQUARE_PITCH: f64 = 10.0;
const TRIANGLE_EDGE: f64 = 12.0;
const STAR_INNER_PITCH: f64 = 10.0;
const STAR_OUTER_PITCH: f64 = 18.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    LargeSquare,
    SmallSquare,
    Triangle,
    Star,
}

impl GridKind {
    pub const ALL: [GridKind; 4] = [
        GridKind::LargeSquare,
        GridKind::SmallSquare,
        GridKind::Triangle,
        GridKind::Star,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GridKind::LargeSquare => "large-square",
            GridKind::SmallSquare => "small-square",
            GridKind::Triangle => "triangle",
            GridKind::Star => "star",
        }
    }
}

impl fmt::Display for GridKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GridKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GridKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown grid `{s}` (expected large-square, small-square, triangle or star)"))
    }
}

/// Static SLM sites in the compute zone, row-major from the bottom left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlmGrid {
    pub kind: GridKind,
    pub sites: Vec<Point>,
    /// Indices of sites that may hold an atom, in site order.
    pub usable: Vec<usize>,
}

impl SlmGrid {
    pub fn usable_count(&self) -> usize {
        self.usable.len()
    }

    pub fn usable_sites(&self) -> impl Iterator<Item = (usize, Point)> + '_ {
        self.usable.iter().map(|&i| (i, self.sites[i]))
    }
}

fn square_lattice(area: &Rect, pitch: f64) -> Vec<Point> {
    let nx = ((area.width() + EPS) / pitch).floor() as usize + 1;
    let ny = ((area.height() + EPS) / pitch).floor() as usize + 1;
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            out.push(Point::new(area.x_min + i as f64 * pitch, area.y_min + j as f64 * pitch));
        }
    }
    out
}

fn triangle_lattice(area: &Rect, edge: f64) -> Vec<Point> {
    let h = edge * 3f64.sqrt() / 2.0;
    let rows = ((area.height() + EPS) / h).floor() as usize + 1;
    let mut out = Vec::new();
    for r in 0..rows {
        let y = area.y_min + r as f64 * h;
        let mut x = area.x_min + if r % 2 == 1 { edge / 2.0 } else { 0.0 };
        while x <= area.x_max + EPS {
            out.push(Point::new(x, y));
            x += edge;
        }
    }
    out
}

fn star_lattice(area: &Rect, compute: &Rect) -> Vec<Point> {
    let centre = Rect::new(
        compute.x_min + compute.width() / 3.0,
        compute.y_min + compute.height() / 3.0,
        compute.x_min + 2.0 * compute.width() / 3.0,
        compute.y_min + 2.0 * compute.height() / 3.0,
    );
    // Snap the dense lattice to the same origin as the sparse one.
    let snap = |lo: f64, origin: f64| origin + ((lo - origin) / STAR_INNER_PITCH - EPS).ceil() * STAR_INNER_PITCH;
    let inner_area = Rect::new(
        snap(centre.x_min, area.x_min),
        snap(centre.y_min, area.y_min),
        centre.x_max,
        centre.y_max,
    );
    let inner = square_lattice(&inner_area, STAR_INNER_PITCH);
    let outer = square_lattice(area, STAR_OUTER_PITCH)
        .into_iter()
        .filter(|p| !centre.contains(*p))
        .filter(|p| inner.iter().all(|q| p.dist(*q) >= STAR_INNER_PITCH - EPS));
    let mut all: Vec<Point> = inner.iter().copied().chain(outer).collect();
    all.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)));
    all
}

/// Greedy pass in site order keeping sites whose atoms, and whose CZ
/// approach points, stay outside every kept site's crosstalk radius.
fn usable_sites(sites: &[Point], params: &PhysParams) -> Vec<usize> {
    let r = params.crosstalk_radius - EPS;
    let approach = |p: Point| Point::new(p.x + INTERACTION_OFFSET, p.y);
    let mut kept: Vec<usize> = Vec::new();
    for (i, &s) in sites.iter().enumerate() {
        let ok = kept.iter().all(|&k| {
            let t = sites[k];
            s.dist(t) >= r && approach(s).dist(t) >= r && approach(t).dist(s) >= r
        });
        if ok {
            kept.push(i);
        }
    }
    kept
}

/// Builds the SLM grid of `kind` inside the layout's compute zone.
pub fn generate_grid(
    kind: GridKind,
    layout: &ZoneLayout,
    params: &PhysParams,
    min_sites: usize,
) -> Result<SlmGrid, CapacityError> {
    let c = layout.compute;
    let area = Rect::new(
        c.x_min + CORRIDOR_MARGIN,
        c.y_min + CORRIDOR_MARGIN,
        c.x_max - CORRIDOR_MARGIN,
        c.y_max - CORRIDOR_MARGIN,
    );
    let sites = match kind {
        GridKind::LargeSquare => square_lattice(&area, LARGE_SQUARE_PITCH),
        GridKind::SmallSquare => square_lattice(&area, SMALL_SQUARE_PITCH),
        GridKind::Triangle => triangle_lattice(&area, TRIANGLE_EDGE),
        GridKind::Star => star_lattice(&area, &c),
    };
    let usable = usable_sites(&sites, params);
    if usable.len() < min_sites {
        return Err(CapacityError::InsufficientSlm {
            needed: min_sites,
            available: usable.len(),
        });
    }
    Ok(SlmGrid { kind, sites, usable })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeometryViolation(pub String);

impl fmt::Display for GeometryViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Checks zone containment and disjointness plus the SLM grid invariants.
pub fn validate_geometry(layout: &ZoneLayout, grid: &SlmGrid, params: &PhysParams) -> Vec<GeometryViolation> {
    let mut out = Vec::new();
    let zones = layout.zones();
    for (i, (na, a)) in zones.iter().enumerate() {
        if !layout.bounds.contains_rect(a) {
            out.push(GeometryViolation(format!("zone {na} exceeds layout bounds")));
        }
        for (nb, b) in &zones[i + 1..] {
            if a.overlaps(b) {
                out.push(GeometryViolation(format!("zones {na} and {nb} overlap")));
            }
        }
    }
    let c = layout.compute;
    for (i, s) in grid.sites.iter().enumerate() {
        let inside = s.x > c.x_min && s.x < c.x_max && s.y > c.y_min && s.y < c.y_max;
        if !inside {
            out.push(GeometryViolation(format!("site {i} at ({}, {}) outside compute", s.x, s.y)));
        } else if s.x - c.x_min < params.crosstalk_radius - EPS || c.x_max - s.x < params.crosstalk_radius - EPS {
            out.push(GeometryViolation(format!("site {i} too close to a compute edge")));
        }
    }
    for i in 0..grid.sites.len() {
        for j in i + 1..grid.sites.len() {
            let d = grid.sites[i].dist(grid.sites[j]);
            if d < params.interaction_radius - EPS {
                out.push(GeometryViolation(format!(
                    "site pair ({i}, {j}) below interaction radius: {d:.3} µm"
                )));
            } else if grid.kind == GridKind::LargeSquare && d < params.crosstalk_radius - EPS {
                out.push(GeometryViolation(format!(
                    "site pair ({i}, {j}) below crosstalk radius: {d:.3} µm"
                )));
            }
        }
    }
    for &u in &grid.usable {
        if u >= grid.sites.len() {
            out.push(GeometryViolation(format!("usable index {u} out of range")));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(kind: GridKind) -> SlmGrid {
        generate_grid(kind, &ZoneLayout::standard(), &PhysParams::default(), 0).unwrap()
    }

    #[test]
    fn large_square_is_twelve_by_eight() {
        let g = grid(GridKind::LargeSquare);
        assert_eq!(g.sites.len(), 96);
        assert_eq!(g.sites[0], Point::new(100.0, 65.0));
        assert_eq!(g.sites[1], Point::new(115.0, 65.0));
        assert_eq!(g.sites[95], Point::new(265.0, 170.0));
        assert_eq!(g.usable_count(), 96);
    }

    #[test]
    fn small_square_has_more_sites() {
        let s = grid(GridKind::SmallSquare);
        assert_eq!(s.sites.len(), 18 * 12);
        assert!(s.sites.len() > grid(GridKind::LargeSquare).sites.len());
        // every other site per row keeps approach points clear
        assert_eq!(s.usable_count(), 108);
    }

    #[test]
    fn triangle_rows() {
        let t = grid(GridKind::Triangle);
        assert_eq!(t.sites.len(), 6 * 15 + 5 * 14);
        assert_eq!(t.usable_count(), t.sites.len());
    }

    #[test]
    fn star_mixes_pitches() {
        let s = grid(GridKind::Star);
        let near10 = s
            .sites
            .iter()
            .enumerate()
            .any(|(i, a)| s.sites[i + 1..].iter().any(|b| (a.dist(*b) - 10.0).abs() < 1e-9));
        let near18 = s
            .sites
            .iter()
            .enumerate()
            .any(|(i, a)| s.sites[i + 1..].iter().any(|b| (a.dist(*b) - 18.0).abs() < 1e-9));
        assert!(near10 && near18);
    }

    #[test]
    fn generated_grids_validate_and_are_row_major() {
        let p = PhysParams::default();
        for layout in [ZoneLayout::standard(), ZoneLayout::doubled()] {
            for kind in GridKind::ALL {
                let g = generate_grid(kind, &layout, &p, 0).unwrap();
                assert_eq!(validate_geometry(&layout, &g, &p), vec![], "{kind}");
                for w in g.sites.windows(2) {
                    assert!(w[0].y < w[1].y || (w[0].y == w[1].y && w[0].x < w[1].x));
                }
                assert_eq!(g, generate_grid(kind, &layout, &p, 0).unwrap());
            }
        }
    }

    #[test]
    fn capacity_error() {
        let e = generate_grid(GridKind::LargeSquare, &ZoneLayout::standard(), &PhysParams::default(), 97)
            .unwrap_err();
        assert!(e.to_string().starts_with("insufficient SLM capacity"));
    }

    #[test]
    fn violations_reported() {
        let p = PhysParams::default();
        let l = ZoneLayout::standard();
        let g = SlmGrid {
            kind: GridKind::SmallSquare,
            sites: vec![Point::new(150.0, 100.0), Point::new(151.0, 100.0), Point::new(10.0, 10.0)],
            usable: vec![0],
        };
        let v = validate_geometry(&l, &g, &p);
        assert!(v.iter().any(|m| m.0.contains("below interaction radius")));
        assert!(v.iter().any(|m| m.0.contains("outside compute")));
    }

    #[test]
    fn grid_kind_names_round_trip() {
        for k in GridKind::ALL {
            assert_eq!(k.name().parse::<GridKind>().unwrap(), k);
        }
    }
}
