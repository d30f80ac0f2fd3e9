//! Zachary's karate club: 34 members, 78 friendships, split into two factions.

use crate::model::{GroupAssignment, SymMatrix};

pub const KARATE_NODES: usize = 34;

/// Edges as 1-indexed member pairs.
pub const KARATE_EDGES: [(usize, usize); 78] = [
    (1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (1, 7), (1, 8), (1, 9), (1, 11), (1, 12),
    (1, 13), (1, 14), (1, 18), (1, 20), (1, 22), (1, 32), (2, 3), (2, 4), (2, 8), (2, 14),
    (2, 18), (2, 20), (2, 22), (2, 31), (3, 4), (3, 8), (3, 9), (3, 10), (3, 14), (3, 28),
    (3, 29), (3, 33), (4, 8), (4, 13), (4, 14), (5, 7), (5, 11), (6, 7), (6, 11), (6, 17),
    (7, 17), (9, 31), (9, 33), (9, 34), (10, 34), (14, 34), (15, 33), (15, 34), (16, 33), (16, 34),
    (19, 33), (19, 34), (20, 34), (21, 33), (21, 34), (23, 33), (23, 34), (24, 26), (24, 28), (24, 30),
    (24, 33), (24, 34), (25, 26), (25, 28), (25, 32), (26, 32), (27, 30), (27, 34), (28, 34), (29, 32),
    (29, 34), (30, 33), (30, 34), (31, 33), (31, 34), (32, 33), (32, 34), (33, 34),
];

/// 0-indexed members who sided with the instructor; everyone else followed the officer.
pub const INSTRUCTOR_FACTION: [usize; 17] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 10, 11, 12, 13, 16, 17, 19, 21];

/// Unweighted adjacency matrix.
pub fn karate_adjacency() -> SymMatrix {
    let mut m = nalgebra::DMatrix::zeros(KARATE_NODES, KARATE_NODES);
    for &(a, b) in &KARATE_EDGES {
        m[(a - 1, b - 1)] = 1.0;
        m[(b - 1, a - 1)] = 1.0;
    }
    SymMatrix::symmetrize(m)
}

/// Faction labels: 0 for the instructor's side, 1 for the officer's.
pub fn karate_factions() -> GroupAssignment {
    let labels = (0..KARATE_NODES)
        .map(|i| usize::from(!INSTRUCTOR_FACTION.contains(&i)))
        .collect();
    GroupAssignment::new(labels, 2).expect("both factions are large")
}
