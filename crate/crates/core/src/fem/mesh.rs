use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::FemError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryTag {
    Dirichlet,
    Neumann,
    Contact,
}

impl BoundaryTag {
    fn code(self) -> &'static str {
        match self {
            BoundaryTag::Dirichlet => "D",
            BoundaryTag::Neumann => "N",
            BoundaryTag::Contact => "C",
        }
    }
}

impl FromStr for BoundaryTag {
    type Err = FemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "D" => Ok(BoundaryTag::Dirichlet),
            "N" => Ok(BoundaryTag::Neumann),
            "C" => Ok(BoundaryTag::Contact),
            other => Err(FemError::Parse { line: 0, message: format!("unknown boundary tag `{other}`") }),
        }
    }
}

/// Boundary condition per side of a rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideTags {
    pub bottom: BoundaryTag,
    pub right: BoundaryTag,
    pub top: BoundaryTag,
    pub left: BoundaryTag,
}

impl SideTags {
    /// Frictional bottom, clamped top, traction-free sides.
    pub fn slab() -> Self {
        Self {
            bottom: BoundaryTag::Contact,
            right: BoundaryTag::Neumann,
            top: BoundaryTag::Dirichlet,
            left: BoundaryTag::Neumann,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub tag: BoundaryTag,
}

/// A vertex on the frictional boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactNode {
    pub vertex: usize,
    /// Trapezoidal quadrature weight: half the length of each adjacent
    /// contact edge.
    pub weight: f64,
    /// Free dof carrying the tangential velocity, or `None` where the vertex
    /// is also clamped.
    pub tangential_dof: Option<usize>,
}

/// Straight frictional boundary with axis-aligned outward normal.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactGeometry {
    /// Coordinate axis of the normal (0 = x, 1 = y).
    pub normal_axis: usize,
    /// Sign of the outward normal along `normal_axis`.
    pub normal_sign: f64,
    /// Nodes ordered along the tangential axis.
    pub nodes: Vec<ContactNode>,
    pub length: f64,
}

impl ContactGeometry {
    pub fn tangential_axis(&self) -> usize {
        1 - self.normal_axis
    }
}

/// Two-dimensional P1 triangulation with tagged boundary and the map from
/// vertex components to free degrees of freedom.
///
/// Vertices on a Dirichlet edge lose both components. Vertices on the contact
/// boundary lose the normal component (bilateral contact).
#[derive(Debug, Clone, PartialEq)]
pub struct MeshModel {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    dof_map: Vec<[Option<usize>; 2]>,
    n_free: usize,
    contact: ContactGeometry,
    label: String,
}

pub fn triangle_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

impl MeshModel {
    pub fn new(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Self, FemError> {
        let nv = vertices.len();
        if vertices.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
            return Err(FemError::InvalidMesh("non-finite vertex coordinate".into()));
        }
        if triangles.is_empty() {
            return Err(FemError::InvalidMesh("no triangles".into()));
        }
        // Oriented edges of each triangle; a boundary edge appears exactly once.
        let mut edge_count: BTreeMap<(usize, usize), (usize, (usize, usize))> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= nv) {
                return Err(FemError::InvalidMesh(format!("triangle {t} references a missing vertex")));
            }
            let area = triangle_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(area > 0.0) {
                return Err(FemError::SingularElement { triangle: t, area });
            }
            for k in 0..3 {
                let (i, j) = (tri[k], tri[(k + 1) % 3]);
                let key = (i.min(j), i.max(j));
                let entry = edge_count.entry(key).or_insert((0, (i, j)));
                entry.0 += 1;
                if entry.0 > 2 {
                    return Err(FemError::InvalidMesh(format!("edge {key:?} shared by more than two triangles")));
                }
            }
        }
        let boundary: BTreeMap<(usize, usize), (usize, usize)> =
            edge_count.into_iter().filter(|(_, (n, _))| *n == 1).map(|(k, (_, o))| (k, o)).collect();

        let mut tagged = BTreeSet::new();
        for e in &boundary_edges {
            let key = (e.a.min(e.b), e.a.max(e.b));
            if !boundary.contains_key(&key) {
                return Err(FemError::InvalidMesh(format!("tagged edge {key:?} is not a boundary edge")));
            }
            if !tagged.insert(key) {
                return Err(FemError::InvalidMesh(format!("boundary edge {key:?} tagged twice")));
            }
        }
        if let Some(missing) = boundary.keys().find(|k| !tagged.contains(k)) {
            return Err(FemError::InvalidMesh(format!("boundary edge {missing:?} has no tag")));
        }

        let mut dirichlet = vec![false; nv];
        let mut on_contact = vec![false; nv];
        let mut contact_weight = vec![0.0; nv];
        let mut dirichlet_length = 0.0;
        let mut normal: Option<(usize, f64, f64)> = None;
        for e in &boundary_edges {
            let key = (e.a.min(e.b), e.a.max(e.b));
            let (i, j) = boundary[&key];
            let (p, q) = (vertices[i], vertices[j]);
            let len = (q[0] - p[0]).hypot(q[1] - p[1]);
            match e.tag {
                BoundaryTag::Dirichlet => {
                    dirichlet[i] = true;
                    dirichlet[j] = true;
                    dirichlet_length += len;
                }
                BoundaryTag::Neumann => {}
                BoundaryTag::Contact => {
                    // counter-clockwise traversal: outward normal is (dy, -dx)/len
                    let n = [(q[1] - p[1]) / len, -(q[0] - p[0]) / len];
                    let axis = if n[0].abs() > 0.5 { 0 } else { 1 };
                    if (n[1 - axis]).abs() > 1e-12 {
                        return Err(FemError::InvalidMesh(format!(
                            "contact edge {key:?} is not axis-aligned (normal {n:?})"
                        )));
                    }
                    let sign = n[axis].signum();
                    let level = p[axis];
                    match normal {
                        None => normal = Some((axis, sign, level)),
                        Some((a0, s0, l0)) => {
                            let tol = 1e-12 * (1.0 + l0.abs());
                            if a0 != axis || s0 != sign || (level - l0).abs() > tol || (q[axis] - l0).abs() > tol {
                                return Err(FemError::InvalidMesh(
                                    "contact boundary is not a single straight segment".into(),
                                ));
                            }
                        }
                    }
                    on_contact[i] = true;
                    on_contact[j] = true;
                    contact_weight[i] += 0.5 * len;
                    contact_weight[j] += 0.5 * len;
                }
            }
        }
        if !(dirichlet_length > 0.0) {
            return Err(FemError::InvalidMesh("Dirichlet boundary must have positive length".into()));
        }
        let (normal_axis, normal_sign) = normal.map(|(a, s, _)| (a, s)).unwrap_or((1, -1.0));

        let mut dof_map = vec![[None, None]; nv];
        let mut n_free = 0;
        for v in 0..nv {
            for c in 0..2 {
                let constrained = dirichlet[v] || (on_contact[v] && c == normal_axis);
                if !constrained {
                    dof_map[v][c] = Some(n_free);
                    n_free += 1;
                }
            }
        }

        let tangential_axis = 1 - normal_axis;
        let mut nodes: Vec<ContactNode> = (0..nv)
            .filter(|&v| on_contact[v])
            .map(|v| ContactNode { vertex: v, weight: contact_weight[v], tangential_dof: dof_map[v][tangential_axis] })
            .collect();
        nodes.sort_by(|x, y| {
            vertices[x.vertex][tangential_axis].total_cmp(&vertices[y.vertex][tangential_axis])
        });
        let length = nodes.iter().map(|n| n.weight).sum();

        let label = format!("{} vertices, {} triangles, {} free dofs", nv, triangles.len(), n_free);
        Ok(Self {
            vertices,
            triangles,
            boundary_edges,
            dof_map,
            n_free,
            contact: ContactGeometry { normal_axis, normal_sign, nodes, length },
            label,
        })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    /// Free dof index of `component` at `vertex`, or `None` if constrained.
    pub fn dof(&self, vertex: usize, component: usize) -> Option<usize> {
        self.dof_map[vertex][component]
    }

    pub fn dof_map(&self) -> &[[Option<usize>; 2]] {
        &self.dof_map
    }

    pub fn n_free(&self) -> usize {
        self.n_free
    }

    pub fn contact(&self) -> &ContactGeometry {
        &self.contact
    }

    /// Short human-readable description, carried into reports next to
    /// mesh-dependent constants.
    pub fn label(&self) -> &str {
        &self.label
    }

    pub(crate) fn set_label(&mut self, label: String) {
        self.label = label;
    }

    pub fn total_area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| triangle_area(self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]))
            .sum()
    }

    /// Plain-text form: `v x y`, `t i j k` and `b i j TAG` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            writeln!(out, "v {:?} {:?}", v[0], v[1]).unwrap();
        }
        for t in &self.triangles {
            writeln!(out, "t {} {} {}", t[0], t[1], t[2]).unwrap();
        }
        for e in &self.boundary_edges {
            writeln!(out, "b {} {} {}", e.a, e.b, e.tag.code()).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, FemError> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let mut edges = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let err = |message: String| FemError::Parse { line, message };
            let mut parts = raw.split_whitespace();
            let Some(kind) = parts.next() else { continue };
            let fields: Vec<&str> = parts.collect();
            let index = |s: &str| s.parse::<usize>().map_err(|e| err(format!("bad index `{s}`: {e}")));
            match (kind, fields.as_slice()) {
                ("v", [x, y]) => {
                    let x = x.parse::<f64>().map_err(|e| err(format!("bad coordinate `{x}`: {e}")))?;
                    let y = y.parse::<f64>().map_err(|e| err(format!("bad coordinate `{y}`: {e}")))?;
                    vertices.push([x, y]);
                }
                ("t", [i, j, k]) => triangles.push([index(i)?, index(j)?, index(k)?]),
                ("b", [i, j, tag]) => {
                    let tag = tag.parse::<BoundaryTag>().map_err(|_| err(format!("unknown boundary tag `{tag}`")))?;
                    edges.push(BoundaryEdge { a: index(i)?, b: index(j)?, tag });
                }
                _ => return Err(err(format!("unrecognized line `{raw}`"))),
            }
        }
        Self::new(vertices, triangles, edges)
    }
}

/// Structured triangulation of `[0, width] × [0, height]` with `nx × ny`
/// cells, each split along its rising diagonal.
pub fn build_mesh_rect(width: f64, height: f64, nx: usize, ny: usize, tags: &SideTags) -> Result<MeshModel, FemError> {
    if !(width > 0.0 && height > 0.0) || !width.is_finite() || !height.is_finite() {
        return Err(FemError::InvalidMesh(format!("degenerate rectangle {width} x {height}")));
    }
    if nx == 0 || ny == 0 {
        return Err(FemError::InvalidMesh(format!("need at least one cell per direction, got {nx} x {ny}")));
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([width * i as f64 / nx as f64, height * j as f64 / ny as f64]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    let mut edges = Vec::new();
    for i in 0..nx {
        edges.push(BoundaryEdge { a: id(i, 0), b: id(i + 1, 0), tag: tags.bottom });
        edges.push(BoundaryEdge { a: id(i + 1, ny), b: id(i, ny), tag: tags.top });
    }
    for j in 0..ny {
        edges.push(BoundaryEdge { a: id(nx, j), b: id(nx, j + 1), tag: tags.right });
        edges.push(BoundaryEdge { a: id(0, j + 1), b: id(0, j), tag: tags.left });
    }
    let mut mesh = MeshModel::new(vertices, triangles, edges)?;
    let label = format!("rect {width} x {height}, {nx} x {ny} cells, {} free dofs", mesh.n_free());
    mesh.set_label(label);
    Ok(mesh)
}
