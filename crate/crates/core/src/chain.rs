//! Link bookkeeping for a linear repeater chain.
//!
//! Nodes are indexed `0..=n_hops`. Intermediate nodes hold two memory
//! qubits, one facing each neighbour; the two end nodes hold one. A link
//! `(left, right)` occupies the right-facing slot of `left` and the
//! left-facing slot of `right`.

use std::fmt;

use crate::error::{Error, Result};
use crate::fidelity::{meets_threshold, DecayModel, Fidelity, WernerParameter};

/// A link that already exists when a trial starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PriorLink {
    pub left: usize,
    pub right: usize,
    /// Steps the link has already spent in memory at `t = 0`.
    pub initial_age: u32,
}

impl PriorLink {
    pub fn new(left: usize, right: usize) -> Self {
        PriorLink {
            left,
            right,
            initial_age: 0,
        }
    }

    pub fn span(&self) -> usize {
        self.right - self.left
    }
}

/// A linear path of `n_hops` elementary links plus any prior entanglement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSpec {
    n_hops: usize,
    priors: Vec<PriorLink>,
}

impl PathSpec {
    /// Path with no prior entanglement.
    pub fn clean(n_hops: usize) -> Result<Self> {
        Self::with_priors(n_hops, Vec::new())
    }

    /// Path with priors given as 0-based `(left, right)` node pairs.
    pub fn new(n_hops: usize, priors: &[(usize, usize)]) -> Result<Self> {
        Self::with_priors(
            n_hops,
            priors.iter().map(|&(l, r)| PriorLink::new(l, r)).collect(),
        )
    }

    pub fn with_priors(n_hops: usize, mut priors: Vec<PriorLink>) -> Result<Self> {
        if n_hops == 0 {
            return Err(Error::Spec("a path needs at least one hop".into()));
        }
        priors.sort_by_key(|p| (p.left, p.right));
        for p in &priors {
            if p.left >= p.right {
                return Err(Error::Spec(format!(
                    "prior ({}, {}) must have left < right",
                    p.left, p.right
                )));
            }
            if p.right > n_hops {
                return Err(Error::Spec(format!(
                    "prior ({}, {}) exceeds node range 0..={n_hops}",
                    p.left, p.right
                )));
            }
        }
        for (i, a) in priors.iter().enumerate() {
            for b in &priors[i + 1..] {
                if a.left == b.left || a.right == b.right {
                    return Err(Error::Spec(format!(
                        "priors ({}, {}) and ({}, {}) share a memory slot",
                        a.left, a.right, b.left, b.right
                    )));
                }
                // sorted by left, so only b can start inside a
                if a.left < b.left && b.left < a.right && a.right < b.right {
                    return Err(Error::Spec(format!(
                        "priors ({}, {}) and ({}, {}) cross and cannot both exist",
                        a.left, a.right, b.left, b.right
                    )));
                }
            }
        }
        Ok(PathSpec { n_hops, priors })
    }

    /// Parses the comma-separated `i-j` prior syntax used in configs.
    ///
    /// Labels are 1-based (node 1 is the source end), so `1-2,3-5` on a
    /// 4-hop path means 0-based links `(0,1)` and `(2,4)`. An optional
    /// `@age` suffix sets the prior's initial age.
    pub fn parse(n_hops: usize, text: &str) -> Result<Self> {
        let mut priors = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (pair, age) = match item.split_once('@') {
                Some((p, a)) => (p, a.trim().parse::<u32>().ok()),
                None => (item, Some(0)),
            };
            let initial_age =
                age.ok_or_else(|| Error::Spec(format!("bad prior age in `{item}`")))?;
            let (l, r) = pair
                .split_once('-')
                .ok_or_else(|| Error::Spec(format!("prior `{item}` is not of the form i-j")))?;
            let parse_label = |s: &str| -> Result<usize> {
                match s.trim().parse::<usize>() {
                    Ok(v) if v >= 1 => Ok(v - 1),
                    _ => Err(Error::Spec(format!("bad node label in prior `{item}`"))),
                }
            };
            priors.push(PriorLink {
                left: parse_label(l)?,
                right: parse_label(r)?,
                initial_age,
            });
        }
        Self::with_priors(n_hops, priors)
    }

    /// Inverse of [`PathSpec::parse`].
    pub fn priors_label(&self) -> String {
        self.priors
            .iter()
            .map(|p| {
                if p.initial_age == 0 {
                    format!("{}-{}", p.left + 1, p.right + 1)
                } else {
                    format!("{}-{}@{}", p.left + 1, p.right + 1, p.initial_age)
                }
            })
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn n_hops(&self) -> usize {
        self.n_hops
    }

    pub fn priors(&self) -> &[PriorLink] {
        &self.priors
    }
}

impl fmt::Display for PathSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-hop", self.n_hops)?;
        if !self.priors.is_empty() {
            write!(f, " [{}]", self.priors_label())?;
        }
        Ok(())
    }
}

/// One entangled pair held between two chain nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WernerLink {
    pub left: usize,
    pub right: usize,
    /// Age anchor. A swapped link inherits the older constituent's birth.
    pub birth_step: i64,
    /// Step at which this link object appeared; swaps wait one step for
    /// classical heralding.
    pub formed_step: i64,
    pub w: WernerParameter,
}

impl WernerLink {
    pub fn age(&self, current_step: i64) -> i64 {
        current_step - self.birth_step
    }

    pub fn fidelity(&self) -> Fidelity {
        self.w.to_fidelity()
    }

    pub fn span(&self) -> usize {
        self.right - self.left
    }
}

/// Live links of one chain during one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    n_hops: usize,
    links: Vec<WernerLink>,
}

/// Places the prior links of `spec` at `t = 0`.
///
/// A prior spanning `s` elementary segments gets `w = e^{-(s + age)/τ}`:
/// one creation-noise factor per segment plus any initial storage time.
pub fn init_chain(spec: &PathSpec, model: &DecayModel) -> ChainState {
    let links = spec
        .priors()
        .iter()
        .map(|p| WernerLink {
            left: p.left,
            right: p.right,
            birth_step: -(p.initial_age as i64),
            formed_step: 0,
            w: WernerParameter::from_noise_units(p.span() as u32 + p.initial_age, model),
        })
        .collect();
    ChainState {
        n_hops: spec.n_hops(),
        links,
    }
}

impl ChainState {
    pub fn empty(n_hops: usize) -> Self {
        ChainState {
            n_hops,
            links: Vec::new(),
        }
    }

    pub fn n_hops(&self) -> usize {
        self.n_hops
    }

    pub fn links(&self) -> &[WernerLink] {
        &self.links
    }

    /// Link whose right endpoint is `node` (fills the node's left-facing slot).
    pub fn link_ending_at(&self, node: usize) -> Option<&WernerLink> {
        self.links.iter().find(|l| l.right == node)
    }

    /// Link whose left endpoint is `node` (fills the node's right-facing slot).
    pub fn link_starting_at(&self, node: usize) -> Option<&WernerLink> {
        self.links.iter().find(|l| l.left == node)
    }

    /// Adjacent pairs whose facing memory slots are both free.
    pub fn eligible_generation_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.n_hops)
            .filter(|&i| self.link_starting_at(i).is_none() && self.link_ending_at(i + 1).is_none())
            .map(|i| (i, i + 1))
            .collect()
    }

    fn swappable(&self, node: usize, current_step: i64) -> bool {
        matches!(
            (self.link_ending_at(node), self.link_starting_at(node)),
            (Some(l), Some(r)) if l.formed_step < current_step && r.formed_step < current_step
        )
    }

    /// Intermediate nodes holding two links that were both heralded before
    /// `current_step`, ascending.
    pub fn eligible_swap_nodes(&self, current_step: i64) -> Vec<usize> {
        (1..self.n_hops)
            .filter(|&n| self.swappable(n, current_step))
            .collect()
    }

    /// Adds a new elementary link between `left` and `left + 1`.
    pub fn create_link(&mut self, left: usize, step: i64, w: WernerParameter) -> Result<()> {
        if left >= self.n_hops {
            return Err(Error::State(format!("no hop starts at node {left}")));
        }
        if self.link_starting_at(left).is_some() || self.link_ending_at(left + 1).is_some() {
            return Err(Error::State(format!(
                "memory slots for ({left}, {}) are occupied",
                left + 1
            )));
        }
        self.links.push(WernerLink {
            left,
            right: left + 1,
            birth_step: step,
            formed_step: step,
            w,
        });
        Ok(())
    }

    /// Swaps at `node`. On success the two links merge into one carrying
    /// the product Werner parameter and the older birth step; on failure
    /// both are lost.
    pub fn apply_swap(&mut self, node: usize, success: bool, current_step: i64) -> Result<()> {
        let li = self.links.iter().position(|l| l.right == node);
        let ri = self.links.iter().position(|l| l.left == node);
        let (li, ri) = match (li, ri) {
            (Some(li), Some(ri)) => (li, ri),
            _ => return Err(Error::State(format!("node {node} does not hold two links"))),
        };
        let l = self.links[li];
        let r = self.links[ri];
        // remove the higher index first so the lower one stays valid
        self.links.swap_remove(li.max(ri));
        self.links.swap_remove(li.min(ri));
        if success {
            self.links.push(WernerLink {
                left: l.left,
                right: r.right,
                birth_step: l.birth_step.min(r.birth_step),
                formed_step: current_step,
                w: l.w * r.w,
            });
        }
        Ok(())
    }

    /// One step of memory decoherence on every link heralded before `current_step`.
    pub fn decay(&mut self, model: &DecayModel, current_step: i64) {
        let factor = model.step_factor();
        for link in self
            .links
            .iter_mut()
            .filter(|l| l.formed_step < current_step)
        {
            link.w = WernerParameter::new(link.w.value() * factor).unwrap_or(WernerParameter::ZERO);
        }
    }

    /// Drops links below the fidelity threshold or older than `cutoff`.
    pub fn discard_stale(&mut self, f_th: Fidelity, cutoff: u32, current_step: i64) {
        self.links
            .retain(|l| meets_threshold(l.w, f_th) && l.age(current_step) <= cutoff as i64);
    }

    /// The link spanning the whole path, if present.
    pub fn e2e_link(&self) -> Option<&WernerLink> {
        self.links
            .iter()
            .find(|l| l.left == 0 && l.right == self.n_hops)
    }

    /// Elementary segments covered by some link.
    pub fn covered_segments(&self) -> Vec<bool> {
        let mut covered = vec![false; self.n_hops];
        for l in &self.links {
            for seg in covered.iter_mut().take(l.right).skip(l.left) {
                *seg = true;
            }
        }
        covered
    }

    /// Checks the per-node memory budget and that no two links cross.
    pub fn check_slots(&self) -> Result<()> {
        for (i, a) in self.links.iter().enumerate() {
            if a.left >= a.right || a.right > self.n_hops {
                return Err(Error::State(format!(
                    "malformed link ({}, {})",
                    a.left, a.right
                )));
            }
            for b in &self.links[i + 1..] {
                if a.left == b.left || a.right == b.right {
                    return Err(Error::State(format!(
                        "links ({}, {}) and ({}, {}) share a slot",
                        a.left, a.right, b.left, b.right
                    )));
                }
                let crossing = (a.left < b.left && b.left < a.right && a.right < b.right)
                    || (b.left < a.left && a.left < b.right && b.right < a.right);
                if crossing {
                    return Err(Error::State(format!(
                        "links ({}, {}) and ({}, {}) cross",
                        a.left, a.right, b.left, b.right
                    )));
                }
            }
        }
        Ok(())
    }
}
