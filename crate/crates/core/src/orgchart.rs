//! Company hierarchy and the level-weighted access structure.
//!
//! A coalition `X` is qualified when
//!
//! 1. the levels of its members sum to at least `h + 1`, and
//! 2. for every level `j`, at most `ceil((h + 1) / j) - 1` members sit at `j`.
//!
//! Condition 2 makes the structure non-monotone: adding a member can break a
//! qualified coalition. Minimal qualified coalitions are still well defined as
//! qualified sets with no qualified proper subset.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;

/// Default ceiling on exhaustive minimal-coalition search.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChartError {
    #[error("height must be at least 2 (got {0}); with one level no coalition can qualify")]
    HeightTooSmall(u32),
    #[error("chart has no participants")]
    Empty,
    #[error("logins start at 1")]
    ZeroLogin,
    #[error("login {0} appears more than once")]
    DuplicateLogin(u64),
    #[error("participant {login} has level {level}, outside 1..={height}")]
    LevelOutOfRange { login: u64, level: u32, height: u32 },
    #[error("level {level} outside 1..={height}")]
    InvalidLevel { level: u32, height: u32 },
    #[error("edge references unknown login {0}")]
    UnknownEdgeEndpoint(u64),
    #[error("edge {parent} -> {child} must go from level j+1 to level j")]
    NonAdjacentEdge { parent: u64, child: u64 },
    #[error("edges do not form a tree of height {height}: {reason}")]
    NotATree { height: u32, reason: String },
    #[error("login {0} is not in the chart")]
    UnknownMember(u64),
    #[error("coalition is empty")]
    EmptyCoalition,
    #[error("{participants} participants exceed the exhaustive-search limit of {limit}; raise the limit explicitly to proceed")]
    EnumerationLimit { participants: usize, limit: usize },
}

/// Participant `P_ij`: login `i` at level `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Participant {
    pub login: u64,
    pub level: u32,
}

impl Participant {
    pub fn new(login: u64, level: u32) -> Self {
        Participant { login, level }
    }
}

impl fmt::Display for Participant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P({},{})", self.login, self.level)
    }
}

/// Reporting line from a level `j + 1` manager to a level `j` participant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub parent: u64,
    pub child: u64,
}

/// Validated, immutable organisation chart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrgChart {
    height: u32,
    participants: Vec<Participant>,
    edges: Vec<Edge>,
}

impl OrgChart {
    pub fn new(
        height: u32,
        participants: impl IntoIterator<Item = Participant>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self, ChartError> {
        if height < 2 {
            return Err(ChartError::HeightTooSmall(height));
        }
        let mut participants: Vec<Participant> = participants.into_iter().collect();
        if participants.is_empty() {
            return Err(ChartError::Empty);
        }
        participants.sort_by_key(|p| p.login);
        for pair in participants.windows(2) {
            if pair[0].login == pair[1].login {
                return Err(ChartError::DuplicateLogin(pair[0].login));
            }
        }
        for p in &participants {
            if p.login == 0 {
                return Err(ChartError::ZeroLogin);
            }
            if p.level == 0 || p.level > height {
                return Err(ChartError::LevelOutOfRange {
                    login: p.login,
                    level: p.level,
                    height,
                });
            }
        }
        let mut edges: Vec<Edge> = edges.into_iter().collect();
        edges.sort();
        let chart = OrgChart {
            height,
            participants,
            edges,
        };
        if !chart.edges.is_empty() {
            chart.validate_tree()?;
        }
        Ok(chart)
    }

    fn validate_tree(&self) -> Result<(), ChartError> {
        let not_a_tree = |reason: String| ChartError::NotATree {
            height: self.height,
            reason,
        };
        let mut parent_of = BTreeMap::new();
        let mut children: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for e in &self.edges {
            let parent = self
                .participant(e.parent)
                .ok_or(ChartError::UnknownEdgeEndpoint(e.parent))?;
            let child = self
                .participant(e.child)
                .ok_or(ChartError::UnknownEdgeEndpoint(e.child))?;
            if parent.level != child.level + 1 {
                return Err(ChartError::NonAdjacentEdge {
                    parent: e.parent,
                    child: e.child,
                });
            }
            if parent_of.insert(e.child, e.parent).is_some() {
                return Err(not_a_tree(format!("login {} has two parents", e.child)));
            }
            children.entry(e.parent).or_default().push(e.child);
        }
        let roots: Vec<&Participant> = self
            .participants
            .iter()
            .filter(|p| !parent_of.contains_key(&p.login))
            .collect();
        let root = match roots.as_slice() {
            [root] => *root,
            _ => return Err(not_a_tree(format!("{} roots", roots.len()))),
        };
        if root.level != self.height {
            return Err(not_a_tree(format!(
                "root {} sits at level {}",
                root.login, root.level
            )));
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![root.login];
        while let Some(login) = stack.pop() {
            seen.insert(login);
            if let Some(kids) = children.get(&login) {
                stack.extend(kids.iter().copied());
            }
        }
        if seen.len() != self.participants.len() {
            return Err(not_a_tree(
                "not every participant is reachable from the root".into(),
            ));
        }
        if !self.participants.iter().any(|p| p.level == 1) {
            return Err(not_a_tree("no participant at level 1".into()));
        }
        Ok(())
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Participants sorted by login.
    pub fn participants(&self) -> &[Participant] {
        &self.participants
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.participants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.participants.is_empty()
    }

    pub fn participant(&self, login: u64) -> Option<Participant> {
        self.participants
            .binary_search_by_key(&login, |p| p.login)
            .ok()
            .map(|i| self.participants[i])
    }

    /// `N_j`: participants at level `j`.
    pub fn level_members(&self, level: u32) -> Vec<Participant> {
        self.participants
            .iter()
            .filter(|p| p.level == level)
            .copied()
            .collect()
    }

    pub fn max_login(&self) -> u64 {
        self.participants.last().map_or(0, |p| p.login)
    }

    pub fn max_level(&self) -> u32 {
        self.participants.iter().map(|p| p.level).max().unwrap_or(0)
    }

    /// Checks both qualification conditions and reports the first failure.
    pub fn qualification(&self, coalition: &Coalition) -> Qualification {
        let required = self.height as u64 + 1;
        let sum = coalition.level_sum();
        if sum < required {
            return Qualification::LevelSumTooLow { sum, required };
        }
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for m in coalition.members() {
            *counts.entry(m.level).or_default() += 1;
        }
        for (&level, &count) in &counts {
            let cap = cap_of(level, self.height);
            if count > cap as usize {
                return Qualification::LevelCapExceeded { level, count, cap };
            }
        }
        Qualification::Qualified
    }

    pub fn is_qualified(&self, coalition: &Coalition) -> bool {
        self.qualification(coalition) == Qualification::Qualified
    }
}

/// Outcome of the two qualification conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Qualification {
    Qualified,
    /// Condition (i) fails.
    LevelSumTooLow {
        sum: u64,
        required: u64,
    },
    /// Condition (ii) fails.
    LevelCapExceeded {
        level: u32,
        count: usize,
        cap: u32,
    },
}

impl fmt::Display for Qualification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Qualification::Qualified => write!(f, "qualified"),
            Qualification::LevelSumTooLow { sum, required } => write!(
                f,
                "condition (i) fails: level sum {sum} is below the required {required}"
            ),
            Qualification::LevelCapExceeded { level, count, cap } => write!(
                f,
                "condition (ii) fails: {count} members at level {level}, at most {cap} allowed"
            ),
        }
    }
}

/// Non-empty set of chart members, ordered by level (highest first) then login.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coalition {
    members: Vec<Participant>,
}

impl Coalition {
    /// Resolves logins against `chart`; duplicates collapse.
    pub fn new(
        chart: &OrgChart,
        logins: impl IntoIterator<Item = u64>,
    ) -> Result<Self, ChartError> {
        let mut members = Vec::new();
        for login in logins {
            members.push(
                chart
                    .participant(login)
                    .ok_or(ChartError::UnknownMember(login))?,
            );
        }
        if members.is_empty() {
            return Err(ChartError::EmptyCoalition);
        }
        Ok(Self::from_members(members))
    }

    fn from_members(mut members: Vec<Participant>) -> Self {
        members.sort_by_key(|p| (Reverse(p.level), p.login));
        members.dedup();
        Coalition { members }
    }

    pub fn members(&self) -> &[Participant] {
        &self.members
    }

    pub fn logins(&self) -> Vec<u64> {
        self.members.iter().map(|p| p.login).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn level_sum(&self) -> u64 {
        self.members.iter().map(|p| p.level as u64).sum()
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

fn cap_of(level: u32, height: u32) -> u32 {
    (height + 1).div_ceil(level) - 1
}

/// `ceil((h + 1) / j) - 1`, the most members level `j` may contribute.
pub fn level_cap(level: u32, height: u32) -> Result<u32, ChartError> {
    if level == 0 || level > height {
        return Err(ChartError::InvalidLevel { level, height });
    }
    Ok(cap_of(level, height))
}

/// All minimal qualified coalitions, sorted by size then membership.
pub fn enumerate_minimal(chart: &OrgChart) -> Result<Vec<Coalition>, ChartError> {
    enumerate_minimal_with(chart, DEFAULT_ENUMERATION_LIMIT, Execution::default())
}

/// Depth-first subset search with two prunings:
///
/// * once a branch reaches the level-sum threshold it is qualified (caps are
///   never exceeded along a branch), so every extension is non-minimal;
/// * a member that would exceed its level cap is never added, since every
///   superset would keep violating the cap.
///
/// Along a surviving branch all proper subsets obey the caps, so a qualified
/// set is minimal iff dropping its lowest-level member falls below `h + 1`.
pub fn enumerate_minimal_with(
    chart: &OrgChart,
    limit: usize,
    execution: Execution,
) -> Result<Vec<Coalition>, ChartError> {
    if chart.len() > limit {
        return Err(ChartError::EnumerationLimit {
            participants: chart.len(),
            limit,
        });
    }
    let mut order = chart.participants().to_vec();
    order.sort_by_key(|p| (Reverse(p.level), p.login));
    let search = Search {
        order: &order,
        height: chart.height,
        caps: (0..=chart.height)
            .map(|j| if j == 0 { 0 } else { cap_of(j, chart.height) })
            .collect(),
    };
    let mut found = execution.flat_map_range(order.len(), |first| {
        let mut out = Vec::new();
        let mut counts = vec![0u32; chart.height as usize + 1];
        let mut chosen = Vec::with_capacity(order.len());
        search.extend(first, &mut chosen, &mut counts, 0, &mut out);
        out
    });
    found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(found)
}

struct Search<'a> {
    order: &'a [Participant],
    height: u32,
    caps: Vec<u32>,
}

impl Search<'_> {
    fn extend(
        &self,
        index: usize,
        chosen: &mut Vec<usize>,
        counts: &mut [u32],
        sum: u64,
        out: &mut Vec<Coalition>,
    ) {
        let p = self.order[index];
        if counts[p.level as usize] >= self.caps[p.level as usize] {
            return;
        }
        counts[p.level as usize] += 1;
        chosen.push(index);
        let sum = sum + p.level as u64;
        let required = self.height as u64 + 1;

        if sum >= required {
            // `order` is level-descending, so the newest member has the lowest level.
            if sum - (p.level as u64) < required {
                out.push(Coalition::from_members(
                    chosen.iter().map(|&i| self.order[i]).collect(),
                ));
            }
        } else {
            for next in index + 1..self.order.len() {
                self.extend(next, chosen, counts, sum, out);
            }
        }

        chosen.pop();
        counts[p.level as usize] -= 1;
    }
}

/// Secret length over the largest private share length.
///
/// The secret holds `h` field elements and a level-`j` share holds `j`, so the
/// `log2 q` factors cancel and the rate is `h / max_j`.
pub fn information_rate(chart: &OrgChart) -> Ratio<u64> {
    Ratio::new(chart.height as u64, chart.max_level() as u64)
}

/// Secret length over the mean share length: `n h / sum_i j_i`.
pub fn average_information_rate(chart: &OrgChart) -> Ratio<u64> {
    let total: u64 = chart.participants().iter().map(|p| p.level as u64).sum();
    Ratio::new(chart.len() as u64 * chart.height as u64, total)
}
