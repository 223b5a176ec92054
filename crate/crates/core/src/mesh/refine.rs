//! Red-green refinement and sibling-group coarsening.
//!
//! Marked triangles are quadrisected (red). Neighbors with two or more split
//! edges are promoted to red as well; those with exactly one are bisected
//! (green). Green pairs are never refined further: when one of them needs a
//! split, the pair is merged back into its parent, which is then refined red.
//! Coarsening is the exact inverse, driven by the genealogy stored in the mesh.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::{GroupKind, Mesh, Origin, Point, RefinementGroup};

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Mutable triangle soup used while refining or coarsening.
struct Soup {
    vertices: Vec<Point>,
    tris: Vec<Option<([usize; 3], Origin)>>,
    groups: Vec<RefinementGroup>,
}

impl Soup {
    fn from_mesh(mesh: &Mesh) -> Self {
        Soup {
            vertices: mesh.vertices.clone(),
            tris: mesh
                .triangles
                .iter()
                .zip(&mesh.origins)
                .map(|(&t, &o)| Some((t, o)))
                .collect(),
            groups: mesh.groups.clone(),
        }
    }

    fn push(&mut self, tri: [usize; 3], origin: Origin) -> usize {
        self.tris.push(Some((tri, origin)));
        self.tris.len() - 1
    }

    fn live_children(&self) -> HashMap<usize, Vec<usize>> {
        let mut map: HashMap<usize, Vec<usize>> = HashMap::new();
        for (t, slot) in self.tris.iter().enumerate() {
            if let Some((_, Origin::Child(g))) = slot {
                map.entry(*g).or_default().push(t);
            }
        }
        map
    }

    /// Replaces the children of group `g` with its parent; returns the parent's index.
    fn merge_group(&mut self, g: usize, children: &[usize]) -> usize {
        for &c in children {
            self.tris[c] = None;
        }
        let grp = &self.groups[g];
        let (parent, origin) = (grp.parent, grp.parent_origin);
        self.push(parent, origin)
    }

    fn midpoint(&mut self, cache: &mut HashMap<(usize, usize), usize>, a: usize, b: usize) -> usize {
        let key = edge_key(a, b);
        if let Some(&m) = cache.get(&key) {
            return m;
        }
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        self.vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
        let m = self.vertices.len() - 1;
        cache.insert(key, m);
        m
    }

    /// Builds the final mesh: drops unused vertices and unreachable groups,
    /// and reports where each surviving input triangle ended up.
    fn finish(self, n_input: usize) -> (Mesh, Vec<Option<usize>>) {
        let Soup {
            vertices,
            tris,
            groups,
        } = self;

        let mut live_groups = vec![false; groups.len()];
        for (_, o) in tris.iter().flatten() {
            let mut o = *o;
            while let Origin::Child(g) = o {
                if live_groups[g] {
                    break;
                }
                live_groups[g] = true;
                o = groups[g].parent_origin;
            }
        }
        let mut group_map = vec![usize::MAX; groups.len()];
        let mut kept_groups = Vec::new();
        for (g, grp) in groups.into_iter().enumerate() {
            if live_groups[g] {
                group_map[g] = kept_groups.len();
                kept_groups.push(grp);
            }
        }
        let remap_origin = |o: Origin| match o {
            Origin::Root => Origin::Root,
            Origin::Child(g) => Origin::Child(group_map[g]),
        };

        let mut used = vec![false; vertices.len()];
        for (t, _) in tris.iter().flatten() {
            t.iter().for_each(|&v| used[v] = true);
        }
        let mut vmap = vec![usize::MAX; vertices.len()];
        let mut kept_vertices = Vec::new();
        for (v, p) in vertices.into_iter().enumerate() {
            if used[v] {
                vmap[v] = kept_vertices.len();
                kept_vertices.push(p);
            }
        }
        for grp in kept_groups.iter_mut() {
            grp.parent = grp.parent.map(|v| vmap[v]);
            grp.midpoint = grp.midpoint.map(|v| vmap[v]);
            grp.parent_origin = remap_origin(grp.parent_origin);
        }

        let mut index_map = vec![None; n_input];
        let mut triangles = Vec::new();
        let mut origins = Vec::new();
        for (old, slot) in tris.into_iter().enumerate() {
            if let Some((t, o)) = slot {
                if old < n_input {
                    index_map[old] = Some(triangles.len());
                }
                triangles.push(t.map(|v| vmap[v]));
                origins.push(remap_origin(o));
            }
        }
        let mesh = Mesh::from_parts(kept_vertices, triangles, origins, kept_groups)
            .expect("refinement preserves mesh validity");
        (mesh, index_map)
    }
}

/// Red-refines the marked triangles and closes the mesh with green bisections.
pub fn refine(mesh: &Mesh, marked: &BTreeSet<usize>) -> Mesh {
    if marked.is_empty() {
        return mesh.clone();
    }
    let n_input = mesh.n_triangles();
    let mut soup = Soup::from_mesh(mesh);
    let mut red: BTreeSet<usize> = BTreeSet::new();
    let mut cache: HashMap<(usize, usize), usize> = HashMap::new();

    fn ungreen(
        soup: &mut Soup,
        red: &mut BTreeSet<usize>,
        cache: &mut HashMap<(usize, usize), usize>,
        g: usize,
    ) {
        let children: Vec<usize> = soup
            .tris
            .iter()
            .enumerate()
            .filter_map(|(t, s)| matches!(s, Some((_, Origin::Child(h))) if *h == g).then_some(t))
            .collect();
        for c in &children {
            red.remove(c);
        }
        let grp = soup.groups[g].clone();
        let [a, b, c] = grp.parent;
        let m = grp.midpoint.expect("green group has a midpoint");
        // the split edge is the parent side not containing the apex shared by both children
        for (p, q) in [(a, b), (b, c), (c, a)] {
            let (pp, pq) = (soup.vertices[p], soup.vertices[q]);
            let pm = soup.vertices[m];
            if (0.5 * (pp[0] + pq[0]) - pm[0]).abs() < 1e-14 * (1.0 + pm[0].abs())
                && (0.5 * (pp[1] + pq[1]) - pm[1]).abs() < 1e-14 * (1.0 + pm[1].abs())
            {
                cache.insert(edge_key(p, q), m);
            }
        }
        let parent = soup.merge_group(g, &children);
        red.insert(parent);
    }

    for &t in marked {
        if t >= n_input {
            continue;
        }
        match soup.tris[t] {
            Some((_, Origin::Child(g))) if soup.groups[g].kind == GroupKind::Green => {
                ungreen(&mut soup, &mut red, &mut cache, g)
            }
            Some(_) => {
                red.insert(t);
            }
            None => {}
        }
    }

    // closure
    loop {
        let split: HashSet<(usize, usize)> = red
            .iter()
            .flat_map(|&t| {
                let (tri, _) = soup.tris[t].unwrap();
                [(0, 1), (1, 2), (2, 0)].map(|(i, j)| edge_key(tri[i], tri[j]))
            })
            .collect();
        let mut changed = false;
        let ids: Vec<usize> = (0..soup.tris.len()).filter(|t| !red.contains(t)).collect();
        for t in ids {
            let Some((tri, origin)) = soup.tris[t] else {
                continue;
            };
            let count = [(0, 1), (1, 2), (2, 0)]
                .iter()
                .filter(|(i, j)| split.contains(&edge_key(tri[*i], tri[*j])))
                .count();
            if count == 0 {
                continue;
            }
            match origin {
                Origin::Child(g) if soup.groups[g].kind == GroupKind::Green => {
                    ungreen(&mut soup, &mut red, &mut cache, g);
                    changed = true;
                }
                _ if count >= 2 => {
                    red.insert(t);
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }

    let split: HashSet<(usize, usize)> = red
        .iter()
        .flat_map(|&t| {
            let (tri, _) = soup.tris[t].unwrap();
            [(0, 1), (1, 2), (2, 0)].map(|(i, j)| edge_key(tri[i], tri[j]))
        })
        .collect();

    for &t in &red {
        let ([a, b, c], origin) = soup.tris[t].take().unwrap();
        let mab = soup.midpoint(&mut cache, a, b);
        let mbc = soup.midpoint(&mut cache, b, c);
        let mca = soup.midpoint(&mut cache, c, a);
        soup.groups.push(RefinementGroup {
            kind: GroupKind::Red,
            parent: [a, b, c],
            parent_origin: origin,
            midpoint: None,
        });
        let o = Origin::Child(soup.groups.len() - 1);
        for child in [[a, mab, mca], [mab, b, mbc], [mca, mbc, c], [mbc, mca, mab]] {
            soup.push(child, o);
        }
    }

    let n_now = soup.tris.len();
    for t in 0..n_now {
        let Some((tri, origin)) = soup.tris[t] else {
            continue;
        };
        let Some(i) = (0..3).find(|&i| split.contains(&edge_key(tri[(i + 1) % 3], tri[(i + 2) % 3])))
        else {
            continue;
        };
        let (apex, p, q) = (tri[i], tri[(i + 1) % 3], tri[(i + 2) % 3]);
        let m = soup.midpoint(&mut cache, p, q);
        soup.tris[t] = None;
        soup.groups.push(RefinementGroup {
            kind: GroupKind::Green,
            parent: tri,
            parent_origin: origin,
            midpoint: Some(m),
        });
        let o = Origin::Child(soup.groups.len() - 1);
        soup.push([apex, p, m], o);
        soup.push([apex, m, q], o);
    }

    soup.finish(n_input).0
}

/// Undoes red refinements whose four children are all marked.
///
/// A group is only merged when its edge midpoints disappear with it: every
/// other triangle using a midpoint must be a green child bisected at that
/// midpoint (those pairs are merged too) or a child of another merged group.
/// Ineligible marks are ignored.
pub fn coarsen(mesh: &Mesh, marked: &BTreeSet<usize>) -> Mesh {
    coarsen_with_map(mesh, marked).0
}

/// [`coarsen`], also returning the new index of every triangle that survived unchanged.
pub fn coarsen_with_map(mesh: &Mesh, marked: &BTreeSet<usize>) -> (Mesh, Vec<Option<usize>>) {
    let n_input = mesh.n_triangles();
    if marked.is_empty() {
        return (mesh.clone(), (0..n_input).map(Some).collect());
    }
    let mut soup = Soup::from_mesh(mesh);
    let children = soup.live_children();

    let mut candidates: BTreeSet<usize> = children
        .iter()
        .filter(|(g, ch)| {
            soup.groups[**g].kind == GroupKind::Red
                && ch.len() == 4
                && ch.iter().all(|c| marked.contains(c))
        })
        .map(|(g, _)| *g)
        .collect();

    let mut vertex_tris: HashMap<usize, Vec<usize>> = HashMap::new();
    for (t, slot) in soup.tris.iter().enumerate() {
        if let Some((tri, _)) = slot {
            for &v in tri {
                vertex_tris.entry(v).or_default().push(t);
            }
        }
    }
    let group_of = |t: usize| match soup.tris[t] {
        Some((_, Origin::Child(g))) => Some(g),
        _ => None,
    };
    let red_midpoints = |g: usize| -> Vec<usize> {
        let parent: HashSet<usize> = soup.groups[g].parent.into_iter().collect();
        let mut mids: Vec<usize> = children[&g]
            .iter()
            .flat_map(|&c| soup.tris[c].unwrap().0)
            .filter(|v| !parent.contains(v))
            .collect();
        mids.sort_unstable();
        mids.dedup();
        mids
    };

    loop {
        let mut drop = Vec::new();
        for &g in &candidates {
            let ok = red_midpoints(g).iter().all(|m| {
                vertex_tris[m].iter().all(|&t| match group_of(t) {
                    Some(h) if candidates.contains(&h) => true,
                    Some(h) => {
                        let grp = &soup.groups[h];
                        grp.kind == GroupKind::Green && grp.midpoint == Some(*m)
                    }
                    None => false,
                })
            });
            if !ok {
                drop.push(g);
            }
        }
        if drop.is_empty() {
            break;
        }
        for g in drop {
            candidates.remove(&g);
        }
    }
    if candidates.is_empty() {
        return (mesh.clone(), (0..n_input).map(Some).collect());
    }

    let mut greens: BTreeSet<usize> = BTreeSet::new();
    for &g in &candidates {
        for m in red_midpoints(g) {
            for &t in &vertex_tris[&m] {
                if let Some(h) = group_of(t) {
                    if soup.groups[h].kind == GroupKind::Green {
                        greens.insert(h);
                    }
                }
            }
        }
    }
    for g in candidates.iter().chain(greens.iter()) {
        let ch = children[g].clone();
        soup.merge_group(*g, &ch);
    }
    soup.finish(n_input)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{unit_square, TriangleGeometry};

    fn all(m: &Mesh) -> BTreeSet<usize> {
        (0..m.n_triangles()).collect()
    }

    fn square2() -> Mesh {
        Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn empty_marking_is_identity() {
        let m = unit_square(3);
        assert_eq!(refine(&m, &BTreeSet::new()).canonical_triangles(), m.canonical_triangles());
        assert_eq!(coarsen(&m, &BTreeSet::new()).canonical_triangles(), m.canonical_triangles());
    }

    #[test]
    fn uniform_refinement_quadruples_and_halves() {
        let m = unit_square(2);
        let r = refine(&m, &all(&m));
        assert_eq!(r.n_triangles(), 4 * m.n_triangles());
        assert!((r.max_diameter() - m.max_diameter() / 2.0).abs() < 1e-14);
        assert_eq!(r.canonical_triangles(), unit_square(4).canonical_triangles());
    }

    #[test]
    fn single_mark_on_two_triangle_square() {
        let m = square2();
        let r = refine(&m, &BTreeSet::from([0]));
        assert_eq!(r.n_triangles(), 6);
        assert!(r.find_hanging_vertex().is_none());
        assert!((r.area() - 1.0).abs() < 1e-14);
        // conformity by edge counting: every edge has one or two neighbors and
        // the boundary is exactly the four (now split) square sides
        assert_eq!(r.n_boundary_edges(), 6);
    }

    #[test]
    fn refine_then_coarsen_restores() {
        let m = square2();
        let r = refine(&m, &BTreeSet::from([0]));
        let red: BTreeSet<usize> = (0..r.n_triangles())
            .filter(|&t| matches!(r.origins()[t], Origin::Child(g) if r.groups()[g].kind == GroupKind::Red))
            .collect();
        assert_eq!(red.len(), 4);
        let c = coarsen(&r, &red);
        assert_eq!(c.canonical_triangles(), m.canonical_triangles());
        assert_eq!(c.vertices(), m.vertices());
        assert!(c.groups().is_empty());

        let three: BTreeSet<usize> = red.iter().take(3).cloned().collect();
        assert_eq!(coarsen(&r, &three).canonical_triangles(), r.canonical_triangles());
    }

    #[test]
    fn green_is_replaced_before_refining() {
        let m = square2();
        let r = refine(&m, &BTreeSet::from([0]));
        let green = (0..r.n_triangles())
            .find(|&t| matches!(r.origins()[t], Origin::Child(g) if r.groups()[g].kind == GroupKind::Green))
            .unwrap();
        let rr = refine(&r, &BTreeSet::from([green]));
        // both original triangles are now red refined: 8 similar triangles
        assert_eq!(rr.n_triangles(), 8);
        assert_eq!(rr.canonical_triangles(), refine(&m, &all(&m)).canonical_triangles());
        assert!(rr.check_shape_regularity(5.0).is_empty());
    }

    #[test]
    fn nested_uniform_round_trip() {
        let m = unit_square(2);
        let r1 = refine(&m, &all(&m));
        let r2 = refine(&r1, &all(&r1));
        let c1 = coarsen(&r2, &all(&r2));
        assert_eq!(c1.canonical_triangles(), r1.canonical_triangles());
        let c0 = coarsen(&c1, &all(&c1));
        assert_eq!(c0.canonical_triangles(), m.canonical_triangles());
        assert_eq!(c0.vertices(), m.vertices());
    }

    #[test]
    fn red_children_are_similar() {
        let m = Mesh::new(vec![[0.1, 0.0], [1.3, 0.2], [0.4, 0.9]], vec![[0, 1, 2]]).unwrap();
        let g = m.geometry(0).unwrap();
        let r = refine(&m, &BTreeSet::from([0]));
        for t in 0..4 {
            let c = TriangleGeometry::new(r.triangle_points(t));
            assert!((c.diameter - g.diameter / 2.0).abs() < 1e-14);
            let mut e1 = c.eccentricity;
            let mut e0 = g.eccentricity;
            e1.sort_by(f64::total_cmp);
            e0.sort_by(f64::total_cmp);
            for i in 0..3 {
                assert!((e1[i] - e0[i]).abs() < 1e-12);
            }
        }
    }
}
