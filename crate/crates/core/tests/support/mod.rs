//! Shared helpers for integration tests: a pure-graph peeling oracle that
//! knows nothing about signals, norms, or filtering.

use std::collections::BTreeSet;

use mimo_ra_core::ActivitySchedule;

/// Peels the true bipartite collision graph: repeatedly resolve any resource
/// block containing exactly one unresolved user and remove that user from
/// every block it occupies. Returns the set of resolvable users.
///
/// This is the combinatorial ground truth the signal-domain decoder must
/// reproduce on ideal noiseless channels.
pub fn peel_graph(schedule: &ActivitySchedule) -> BTreeSet<usize> {
    let beta = schedule.beta();
    let tau = schedule.tau();
    let mut members: Vec<Vec<BTreeSet<usize>>> = (0..beta)
        .map(|n| (0..tau).map(|j| schedule.members(n, j).collect()).collect())
        .collect();
    let mut decoded = BTreeSet::new();
    loop {
        let mut singleton = None;
        'scan: for (n, row) in members.iter().enumerate() {
            for (j, block) in row.iter().enumerate() {
                if block.len() == 1 {
                    singleton = Some((n, j));
                    break 'scan;
                }
            }
        }
        let Some((n, j)) = singleton else { break };
        let user = *members[n][j].iter().next().unwrap();
        decoded.insert(user);
        for (n2, j2) in schedule.user_pattern(user) {
            members[n2][j2].remove(&user);
        }
    }
    decoded
}
