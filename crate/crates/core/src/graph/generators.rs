use super::{Graph, NodeId};
use crate::error::{Error, Result};

/// Full rooted tree with `branching` children per internal node and
/// `height` levels below the root. Nodes are numbered in BFS order, so the
/// children of node `i` are `i*b + 1 ..= i*b + b`.
pub fn gen_tree(branching: usize, height: usize) -> Result<Graph> {
    if branching == 0 {
        return Err(Error::InvalidArgument("tree branching must be >= 1".into()));
    }
    let mut num_nodes = 1usize;
    let mut level = 1usize;
    for _ in 0..height {
        level = level
            .checked_mul(branching)
            .ok_or_else(|| Error::InvalidArgument("tree too large".into()))?;
        num_nodes += level;
    }
    let edges = (1..num_nodes).map(|child| ((child - 1) / branching, child));
    Graph::unweighted(num_nodes, edges)
}

/// Axis-aligned lattice. Row-major ids: the last axis varies fastest.
pub fn gen_grid(sides: &[usize]) -> Result<Graph> {
    if sides.is_empty() {
        return Err(Error::InvalidArgument(
            "grid needs at least one side".into(),
        ));
    }
    if let Some(s) = sides.iter().find(|&&s| s < 2) {
        return Err(Error::InvalidArgument(format!(
            "grid side {s} is below the minimum of 2"
        )));
    }
    let num_nodes: usize = sides.iter().product();
    let mut strides = vec![1usize; sides.len()];
    for axis in (0..sides.len() - 1).rev() {
        strides[axis] = strides[axis + 1] * sides[axis + 1];
    }
    let mut edges = Vec::new();
    for node in 0..num_nodes {
        for (&side, &stride) in sides.iter().zip(&strides) {
            let coord = (node / stride) % side;
            if coord + 1 < side {
                edges.push((node, node + stride));
            }
        }
    }
    Graph::unweighted(num_nodes, edges)
}

/// Cartesian (box) product. Node `(i1, i2)` has id `i1 * |V2| + i2`.
pub fn cartesian_product(g1: &Graph, g2: &Graph) -> Result<Graph> {
    let (n1, n2) = (g1.num_nodes(), g2.num_nodes());
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidArgument(
            "cartesian product of an empty graph".into(),
        ));
    }
    let mut edges = Vec::with_capacity(n1 * g2.num_edges() + n2 * g1.num_edges());
    for i1 in 0..n1 {
        for e in g2.edges() {
            edges.push((i1 * n2 + e.u, i1 * n2 + e.v, e.w));
        }
    }
    for e in g1.edges() {
        for i2 in 0..n2 {
            edges.push((e.u * n2 + i2, e.v * n2 + i2, e.w));
        }
    }
    Graph::new(n1 * n2, edges)
}

/// Rooted product: a copy of `fiber` hangs off every base node, with the
/// copy's `fiber_root` identified with that base node. Copy `i`, fiber node
/// `j` has id `i * |V_fiber| + j`; base node `i` is `i * |V_fiber| + fiber_root`.
pub fn rooted_product(base: &Graph, fiber: &Graph, fiber_root: NodeId) -> Result<Graph> {
    let nf = fiber.num_nodes();
    if fiber_root >= nf {
        return Err(Error::InvalidArgument(format!(
            "fiber root {fiber_root} out of range for {nf} nodes"
        )));
    }
    let nb = base.num_nodes();
    let mut edges = Vec::with_capacity(base.num_edges() + nb * fiber.num_edges());
    for e in base.edges() {
        edges.push((e.u * nf + fiber_root, e.v * nf + fiber_root, e.w));
    }
    for i in 0..nb {
        for e in fiber.edges() {
            edges.push((i * nf + e.u, i * nf + e.v, e.w));
        }
    }
    Graph::new(nb * nf, edges)
}

/// The forward images of the four Margulis-Gabber-Galil maps, one directed
/// edge per node per map (`4 n^2` entries, loops and repeats included).
/// Node `(x, y)` has id `x * n + y`.
pub fn margulis_generator_edges(n: usize) -> Vec<(NodeId, NodeId)> {
    let id = |x: usize, y: usize| (x % n) * n + (y % n);
    let mut edges = Vec::with_capacity(4 * n * n);
    for x in 0..n {
        for y in 0..n {
            let src = id(x, y);
            edges.push((src, id(x + 2 * y, y)));
            edges.push((src, id(x + 2 * y + 1, y)));
            edges.push((src, id(x, y + 2 * x)));
            edges.push((src, id(x, y + 2 * x + 1)));
        }
    }
    edges
}

/// Margulis-Gabber-Galil expander on `Z_n x Z_n`, simplified: the inverse
/// maps give the same undirected edges, and self-loops and parallel edges
/// are dropped.
pub fn gen_margulis(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidArgument("margulis needs n >= 2".into()));
    }
    Graph::simplified(n * n, margulis_generator_edges(n))
}

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Paley graph on `Z_q`: `a ~ b` iff `a - b` is a nonzero square mod `q`.
pub fn gen_paley(q: usize) -> Result<Graph> {
    if !is_prime(q) || q % 4 != 1 {
        return Err(Error::InvalidArgument(format!(
            "paley needs a prime q with q = 1 mod 4, got {q}"
        )));
    }
    let mut residue = vec![false; q];
    for x in 1..q {
        residue[x * x % q] = true;
    }
    let mut edges = Vec::new();
    for a in 0..q {
        for b in a + 1..q {
            if residue[b - a] {
                edges.push((a, b));
            }
        }
    }
    Graph::unweighted(q, edges)
}

fn mod_pow(mut base: usize, mut exp: usize, modulus: usize) -> usize {
    let mut acc = 1 % modulus;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    acc
}

/// Chordal cycle on `Z_p`: the cycle `i ~ i+1` plus chords `i ~ i^-1`.
pub fn gen_chordal_cycle(p: usize) -> Result<Graph> {
    if !is_prime(p) {
        return Err(Error::InvalidArgument(format!(
            "chordal cycle needs a prime p, got {p}"
        )));
    }
    let mut edges = Vec::with_capacity(2 * p);
    for i in 0..p {
        edges.push((i, (i + 1) % p));
    }
    for i in 1..p {
        // Fermat: i^(p-2) is the inverse of i mod p.
        edges.push((i, mod_pow(i, p - 2, p)));
    }
    Graph::simplified(p, edges)
}
