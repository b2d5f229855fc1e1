/// Preference class of a SWAP partner, best first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SwapRank {
    /// Its next CZ partner shares its trap type, so the SWAP helps it too.
    Mutual,
    /// No gates left.
    Finished,
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapCandidate {
    pub atom: usize,
    pub rank: SwapRank,
    pub distance: f64,
}

/// Best candidate by rank, then distance, then lower atom id.
pub fn pick_swap_partner(candidates: impl IntoIterator<Item = SwapCandidate>) -> Option<usize> {
    candidates
        .into_iter()
        .min_by(|a, b| {
            a.rank
                .cmp(&b.rank)
                .then(a.distance.total_cmp(&b.distance))
                .then(a.atom.cmp(&b.atom))
        })
        .map(|c| c.atom)
}
