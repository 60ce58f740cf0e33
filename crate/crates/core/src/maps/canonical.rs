use super::{is_zero_vec, CombinatorialType, TypeEdge};

/// A relabeling of a type into canonical vertex and edge order, with its serialization key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    pub key: String,
    pub ty: CombinatorialType,
    /// old vertex index -> canonical index
    pub vertex_map: Vec<usize>,
    /// old edge index -> canonical index
    pub edge_map: Vec<usize>,
}

fn cone_text(c: Option<usize>) -> String {
    c.map_or_else(|| "-".to_string(), |c| c.to_string())
}

impl CombinatorialType {
    fn encode(&self, v: usize, parent_edge: Option<usize>, identify: bool) -> (String, Vec<usize>) {
        let mut items: Vec<(String, Vec<usize>)> = Vec::new();
        for l in self.legs.iter().filter(|l| l.vertex == v) {
            let tag = if identify && !is_zero_vec(&l.contact) {
                format!("K{:?}/{}", l.contact, cone_text(l.carrier))
            } else {
                format!("L{}{:?}/{}", l.label, l.contact, cone_text(l.carrier))
            };
            items.push((tag, Vec::new()));
        }
        for (u, i, d) in self.neighbours(v) {
            if Some(i) == parent_edge {
                continue;
            }
            let (sub, order) = self.encode(u, Some(i), identify);
            items.push((format!("E{:?}/{}{}", d, cone_text(self.edges[i].carrier), sub), order));
        }
        items.sort();
        let mut text = format!("[{}", self.vertex_cones[v]);
        let mut order = vec![v];
        for (s, o) in items {
            text.push(';');
            text.push_str(&s);
            order.extend(o);
        }
        text.push(']');
        (text, order)
    }

    /// Canonical relabeling. With `identify_equal_contacts`, contact legs with equal contact
    /// orders are interchangeable in the key (trivial legs always keep their labels).
    pub fn canonical_form(&self, identify_equal_contacts: bool) -> CanonicalForm {
        let n = self.vertex_count();
        let (key, order) = (0..n)
            .map(|r| self.encode(r, None, identify_equal_contacts))
            .min_by(|a, b| a.0.cmp(&b.0))
            .expect("type has a vertex");
        let mut vertex_map = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            vertex_map[old] = new;
        }
        let mut edges: Vec<(usize, TypeEdge)> = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let (a, b) = (vertex_map[e.tail], vertex_map[e.head]);
                let edge = if a < b {
                    TypeEdge { tail: a, head: b, contact: e.contact.clone(), carrier: e.carrier }
                } else {
                    TypeEdge { tail: b, head: a, contact: e.contact.iter().map(|x| -x).collect(), carrier: e.carrier }
                };
                (i, edge)
            })
            .collect();
        edges.sort_by_key(|(_, e)| (e.tail, e.head));
        let mut edge_map = vec![0; edges.len()];
        for (new, (old, _)) in edges.iter().enumerate() {
            edge_map[*old] = new;
        }
        let mut vertex_cones = vec![0; n];
        for (old, &c) in self.vertex_cones.iter().enumerate() {
            vertex_cones[vertex_map[old]] = c;
        }
        let mut legs = self.legs.clone();
        for l in legs.iter_mut() {
            l.vertex = vertex_map[l.vertex];
        }
        legs.sort_by_key(|l| l.label);
        CanonicalForm {
            key,
            ty: CombinatorialType { vertex_cones, edges: edges.into_iter().map(|(_, e)| e).collect(), legs },
            vertex_map,
            edge_map,
        }
    }

    pub fn canonical_key(&self, identify_equal_contacts: bool) -> String {
        self.canonical_form(identify_equal_contacts).key
    }
}
