//! Finite oriented simplicial complexes of dimension at most two.

use crate::{Error, Result};

/// Signed incidence of a simplex with one of its faces.
pub type Incidence = (usize, i64);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex {
    name: String,
    vertices: usize,
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
    edge_faces: Vec<[Incidence; 2]>,
    triangle_faces: Vec<[Incidence; 3]>,
}

impl SimplicialComplex {
    /// Builds a complex from oriented edges `[tail, head]` and oriented
    /// triangles `[a, b, c]`. Every triangle side must be a listed edge in
    /// either orientation.
    pub fn new(
        name: impl Into<String>,
        vertices: usize,
        edges: Vec<[usize; 2]>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self> {
        let name = name.into();
        if vertices == 0 {
            return Err(Error::InvalidComplex(format!("{name}: no vertices")));
        }
        let mut edge_faces = Vec::with_capacity(edges.len());
        for (i, &[a, b]) in edges.iter().enumerate() {
            if a >= vertices || b >= vertices || a == b {
                return Err(Error::InvalidComplex(format!("{name}: edge {i} = [{a}, {b}] is degenerate or out of range")));
            }
            if edges[..i].iter().any(|&[x, y]| (x, y) == (a, b) || (x, y) == (b, a)) {
                return Err(Error::InvalidComplex(format!("{name}: edge [{a}, {b}] listed twice")));
            }
            edge_faces.push([(a, -1), (b, 1)]);
        }
        let find = |u: usize, v: usize| -> Option<Incidence> {
            edges.iter().enumerate().find_map(|(i, &[x, y])| {
                if (x, y) == (u, v) {
                    Some((i, 1))
                } else if (x, y) == (v, u) {
                    Some((i, -1))
                } else {
                    None
                }
            })
        };
        let mut triangle_faces = Vec::with_capacity(triangles.len());
        for (t, &[a, b, c]) in triangles.iter().enumerate() {
            // d[a,b,c] = [b,c] - [a,c] + [a,b]
            let sides = [(b, c, 1), (a, c, -1), (a, b, 1)];
            let mut faces = [(0, 0); 3];
            for (slot, &(u, v, s)) in sides.iter().enumerate() {
                let (e, o) = find(u, v).ok_or_else(|| {
                    Error::InvalidComplex(format!("{name}: triangle {t} side [{u}, {v}] is not an edge"))
                })?;
                faces[slot] = (e, s * o);
            }
            triangle_faces.push(faces);
        }
        let complex = Self {
            name,
            vertices,
            edges,
            triangles,
            edge_faces,
            triangle_faces,
        };
        complex.check_boundary_squared()?;
        Ok(complex)
    }

    /// Circle as an `n`-gon with edges `[i, i+1 mod n]`.
    pub fn circle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidComplex(format!("circle needs at least 3 vertices, got {n}")));
        }
        let edges = (0..n).map(|i| [i, (i + 1) % n]).collect();
        Self::new(format!("circle({n})"), n, edges, vec![])
    }

    /// Torus as an `m x n` grid with periodic identifications. Vertex
    /// `(i, j)` has index `i * n + j`; each square is split along its
    /// diagonal into `[v00, v10, v11]` and `[v00, v11, v01]`.
    pub fn torus(m: usize, n: usize) -> Result<Self> {
        if m < 3 || n < 3 {
            return Err(Error::InvalidComplex(format!("torus grid needs m, n >= 3, got {m}x{n}")));
        }
        let v = |i: usize, j: usize| (i % m) * n + (j % n);
        let mut edges = Vec::with_capacity(3 * m * n);
        let mut triangles = Vec::with_capacity(2 * m * n);
        for i in 0..m {
            for j in 0..n {
                edges.push([v(i, j), v(i + 1, j)]);
                edges.push([v(i, j), v(i, j + 1)]);
                edges.push([v(i, j), v(i + 1, j + 1)]);
                triangles.push([v(i, j), v(i + 1, j), v(i + 1, j + 1)]);
                triangles.push([v(i, j), v(i + 1, j + 1), v(i, j + 1)]);
            }
        }
        Self::new(format!("torus({m}x{n})"), m * n, edges, triangles)
    }

    /// Boundary of the tetrahedron `[0,1,2,3]`, outward oriented.
    pub fn tetra_sphere() -> Self {
        let edges = vec![[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
        let triangles = vec![[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];
        Self::new("tetra-sphere", 4, edges, triangles).expect("tetrahedron boundary is consistent")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edge_faces(&self) -> &[[Incidence; 2]] {
        &self.edge_faces
    }

    pub fn triangle_faces(&self) -> &[[Incidence; 3]] {
        &self.triangle_faces
    }

    /// Highest degree with at least one simplex.
    pub fn dimension(&self) -> usize {
        if !self.triangles.is_empty() {
            2
        } else if !self.edges.is_empty() {
            1
        } else {
            0
        }
    }

    /// Number of simplices of degree `k` (zero above dimension two).
    pub fn count(&self, k: usize) -> usize {
        match k {
            0 => self.vertices,
            1 => self.edges.len(),
            2 => self.triangles.len(),
            _ => 0,
        }
    }

    pub fn simplex_total(&self) -> usize {
        self.vertices + self.edges.len() + self.triangles.len()
    }

    /// Boundary matrix `d_k` from `k`-chains to `(k-1)`-chains, as rows
    /// indexed by `(k-1)`-simplices.
    pub fn boundary_matrix(&self, k: usize) -> Vec<Vec<i64>> {
        let rows = if k == 0 { 0 } else { self.count(k - 1) };
        let mut m = vec![vec![0i64; self.count(k)]; rows];
        match k {
            1 => {
                for (j, faces) in self.edge_faces.iter().enumerate() {
                    for &(v, s) in faces {
                        m[v][j] += s;
                    }
                }
            }
            2 => {
                for (j, faces) in self.triangle_faces.iter().enumerate() {
                    for &(e, s) in faces {
                        m[e][j] += s;
                    }
                }
            }
            _ => {}
        }
        m
    }

    fn check_boundary_squared(&self) -> Result<()> {
        let d1 = self.boundary_matrix(1);
        let d2 = self.boundary_matrix(2);
        for (v, row) in d1.iter().enumerate() {
            for t in 0..self.triangles.len() {
                let s: i64 = row.iter().enumerate().map(|(e, &a)| a * d2[e][t]).sum();
                if s != 0 {
                    return Err(Error::InvalidComplex(format!(
                        "{}: boundary of boundary of triangle {t} is {s} at vertex {v}",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Builtin complex selected by name: `circle`, `torus` or `tetra-sphere`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Circle(usize),
    Torus(usize, usize),
    TetraSphere,
}

impl Builtin {
    pub fn build(self) -> Result<SimplicialComplex> {
        match self {
            Builtin::Circle(n) => SimplicialComplex::circle(n),
            Builtin::Torus(m, n) => SimplicialComplex::torus(m, n),
            Builtin::TetraSphere => Ok(SimplicialComplex::tetra_sphere()),
        }
    }
}
