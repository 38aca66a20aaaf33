use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::error::{Error, Result};

/// A dependency `head -> body` between predicates; `negative` when the body literal is `\+`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Dependency {
    pub head: String,
    pub body: String,
    pub negative: bool,
}

/// Assigns every predicate a stratum so that positive dependencies point to the same or a
/// lower stratum and negative ones to a strictly lower stratum. Fails when a cycle of the
/// dependency graph contains a negative edge.
pub fn stratify(
    predicates: &BTreeSet<String>,
    deps: &[Dependency],
) -> Result<BTreeMap<String, usize>> {
    let mut graph = DiGraph::<&str, bool>::new();
    let mut nodes: BTreeMap<&str, NodeIndex> = BTreeMap::new();
    let all = predicates
        .iter()
        .map(String::as_str)
        .chain(deps.iter().flat_map(|d| [d.head.as_str(), d.body.as_str()]));
    for p in all {
        nodes.entry(p).or_insert_with(|| graph.add_node(p));
    }
    for d in deps {
        graph.add_edge(nodes[d.head.as_str()], nodes[d.body.as_str()], d.negative);
    }

    // Tarjan yields components in reverse topological order: bodies before heads.
    let sccs = tarjan_scc(&graph);
    let mut component = vec![0usize; graph.node_count()];
    for (i, scc) in sccs.iter().enumerate() {
        for &n in scc {
            component[n.index()] = i;
        }
    }

    let mut level = vec![0usize; sccs.len()];
    for (i, scc) in sccs.iter().enumerate() {
        let mut stratum = 0;
        for &n in scc {
            for edge in graph.edges(n) {
                use petgraph::visit::EdgeRef;
                let target = component[edge.target().index()];
                let negative = *edge.weight();
                if target == i {
                    if negative {
                        let mut cycle: Vec<String> =
                            scc.iter().map(|&m| graph[m].to_owned()).collect();
                        cycle.sort();
                        return Err(Error::Unstratified { cycle });
                    }
                } else {
                    stratum = stratum.max(level[target] + usize::from(negative));
                }
            }
        }
        level[i] = stratum;
    }

    Ok(nodes
        .into_iter()
        .map(|(p, n)| (p.to_owned(), level[component[n.index()]]))
        .collect())
}
