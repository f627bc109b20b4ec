use super::{Point2, SubdomainMesh, GEOMETRY_TOL};
use crate::error::{Error, Result};

/// One cell of the intersection mesh: the overlap of an interface facet from
/// each side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterfaceSegment {
    /// Parameter interval along Γ, measured in length from `gamma[0]`.
    pub interval: [f64; 2],
    pub endpoints: [Point2; 2],
    /// Index into `interface_facets()` of the side-1 and side-2 mesh.
    pub facets: [usize; 2],
    /// Parent triangles on each side.
    pub elements: [usize; 2],
    /// Diameters of the two parent facets.
    pub h: [f64; 2],
}

impl InterfaceSegment {
    pub fn length(&self) -> f64 {
        self.interval[1] - self.interval[0]
    }

    /// Point at local coordinate `s ∈ [0, 1]`.
    pub fn point(&self, s: f64) -> Point2 {
        let [a, b] = self.endpoints;
        a + s * (b - a)
    }
}

/// Common refinement of the two one-sided interface partitions.
#[derive(Clone, Debug)]
pub struct InterfaceMesh {
    gamma: [Point2; 2],
    normal: Point2,
    segments: Vec<InterfaceSegment>,
}

impl InterfaceMesh {
    pub fn gamma_endpoints(&self) -> [Point2; 2] {
        self.gamma
    }

    /// Unit normal on Γ pointing from the first mesh into the second.
    pub fn normal(&self) -> Point2 {
        self.normal
    }

    pub fn segments(&self) -> &[InterfaceSegment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn gamma_length(&self) -> f64 {
        self.gamma[0].distance(self.gamma[1])
    }

    /// Segments contained in interface facet `facet` of side `side` (0 or 1).
    pub fn segments_of_facet(&self, side: usize, facet: usize) -> impl Iterator<Item = usize> + '_ {
        self.segments
            .iter()
            .enumerate()
            .filter(move |(_, s)| s.facets[side] == facet)
            .map(|(i, _)| i)
    }

    /// For each interface facet of `side`, the list of segments it contains.
    pub fn facet_segment_lists(&self, side: usize, num_facets: usize) -> Vec<Vec<usize>> {
        let mut lists = vec![Vec::new(); num_facets];
        for (i, s) in self.segments.iter().enumerate() {
            lists[s.facets[side]].push(i);
        }
        lists
    }
}

struct SideInterval {
    lo: f64,
    hi: f64,
    facet: usize,
}

fn side_intervals(mesh: &SubdomainMesh, gamma_len: f64) -> Result<Vec<SideInterval>> {
    let mut intervals: Vec<SideInterval> = mesh
        .interface_facets()
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let [a, b] = mesh.facet_points(f);
            let (ta, tb) = (mesh.gamma_parameter(a), mesh.gamma_parameter(b));
            SideInterval {
                lo: ta.min(tb),
                hi: ta.max(tb),
                facet: i,
            }
        })
        .collect();
    intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo));

    let tol = GEOMETRY_TOL * gamma_len;
    let mut cursor = 0.0;
    for iv in &intervals {
        if (iv.lo - cursor).abs() > tol {
            return Err(Error::Geometry(format!(
                "interface facets of subdomain {} do not tile Γ: gap or overlap at {cursor}",
                mesh.id()
            )));
        }
        cursor = iv.hi;
    }
    if intervals.is_empty() || (cursor - gamma_len).abs() > tol {
        return Err(Error::Geometry(format!(
            "interface facets of subdomain {} do not cover Γ",
            mesh.id()
        )));
    }
    Ok(intervals)
}

fn containing(intervals: &[SideInterval], t: f64) -> &SideInterval {
    let idx = intervals.partition_point(|iv| iv.hi <= t);
    &intervals[idx.min(intervals.len() - 1)]
}

/// Merges the interface breakpoints of `m1` and `m2` into the intersection
/// mesh. Breakpoints closer than `1e-12·|Γ|` are treated as coincident.
pub fn intersect_interface(m1: &SubdomainMesh, m2: &SubdomainMesh) -> Result<InterfaceMesh> {
    let gamma = m1.gamma();
    let gamma_len = gamma[0].distance(gamma[1]);
    let tol = GEOMETRY_TOL * gamma_len;
    let other = m2.gamma();
    if gamma[0].distance(other[0]) > tol || gamma[1].distance(other[1]) > tol {
        return Err(Error::Geometry(format!(
            "interface endpoints differ: {} - {} versus {} - {}",
            gamma[0], gamma[1], other[0], other[1]
        )));
    }

    let sides = [
        side_intervals(m1, gamma_len)?,
        side_intervals(m2, gamma_len)?,
    ];

    let mut breaks: Vec<f64> = sides
        .iter()
        .flat_map(|s| s.iter().flat_map(|iv| [iv.lo, iv.hi]))
        .collect();
    breaks.sort_by(f64::total_cmp);
    let mut merged: Vec<f64> = Vec::with_capacity(breaks.len());
    for t in breaks {
        match merged.last() {
            Some(&last) if t - last <= tol => {}
            _ => merged.push(t),
        }
    }
    // pin the ends exactly
    merged[0] = 0.0;
    *merged.last_mut().unwrap() = gamma_len;

    let normal = {
        let f = &m1.interface_facets()[sides[0][0].facet];
        m1.facet_normal(f)
    };
    let direction = (1.0 / gamma_len) * (gamma[1] - gamma[0]);
    let segments = merged
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let parents = [containing(&sides[0], mid), containing(&sides[1], mid)];
            let facets = [parents[0].facet, parents[1].facet];
            let f1 = &m1.interface_facets()[facets[0]];
            let f2 = &m2.interface_facets()[facets[1]];
            InterfaceSegment {
                interval: [w[0], w[1]],
                endpoints: [gamma[0] + w[0] * direction, gamma[0] + w[1] * direction],
                facets,
                elements: [f1.element, f2.element],
                h: [m1.facet_length(f1), m2.facet_length(f2)],
            }
        })
        .collect();

    Ok(InterfaceMesh {
        gamma,
        normal,
        segments,
    })
}
