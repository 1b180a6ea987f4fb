//! Event types, operator requests, the operator queue and Naor's threshold.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Event tag `E1`, `E2`, ... (one-based, as printed).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EventId(pub u8);

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventType {
    pub id: EventId,
    pub label: String,
    /// Probability that balking on this event ends in a failure.
    pub fail_prob: f64,
    /// Scale on the mean operator service time for this type.
    pub service_multiplier: f64,
}

impl EventType {
    pub fn new(id: u8, label: &str, fail_prob: f64, service_multiplier: f64) -> Self {
        EventType {
            id: EventId(id),
            label: label.to_string(),
            fail_prob,
            service_multiplier,
        }
    }
}

/// The event types a mission can encounter and the mix they are drawn from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventCatalog {
    pub entries: Vec<EventType>,
    pub mix: Vec<f64>,
}

impl EventCatalog {
    /// Battery recharge, dangerous area and lost connection, drawn uniformly.
    pub fn water_monitoring() -> Self {
        let entries = vec![
            EventType::new(1, "Battery-Recharge", 0.9, 1.0),
            EventType::new(2, "Traversing-Dangerous-Area", 0.4, 1.0),
            EventType::new(3, "Losing-Connection", 0.2, 1.0),
        ];
        let mix = vec![1.0 / 3.0; 3];
        EventCatalog { entries, mix }
    }

    /// Same events with distinct per-type service times.
    ///
    /// This is an extension used to give shortest-job-first something to
    /// reorder; the default catalog shares one service distribution.
    pub fn typed_service() -> Self {
        let mut catalog = Self::water_monitoring();
        for (entry, m) in catalog.entries.iter_mut().zip([1.0, 1.5, 0.5]) {
            entry.service_multiplier = m;
        }
        catalog
    }

    pub fn new(entries: Vec<EventType>, mix: Vec<f64>) -> Result<Self> {
        let catalog = EventCatalog { entries, mix };
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: EventId) -> Option<&EventType> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Index of the entry selected by `u` in `[0, 1)` under the mix.
    pub fn pick(&self, u: f64) -> usize {
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &w) in self.mix.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            last = i;
            if u < acc {
                return i;
            }
        }
        last
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::param("events", "catalog must contain at least one event type"));
        }
        if self.entries.len() != self.mix.len() {
            return Err(Error::param(
                "mix",
                format!("has {} components for {} event types", self.mix.len(), self.entries.len()),
            ));
        }
        for (i, e) in self.entries.iter().enumerate() {
            if !(0.0..=1.0).contains(&e.fail_prob) {
                return Err(Error::param("fail_probs", format!("{} must lie in [0, 1], got {}", e.id, e.fail_prob)));
            }
            if !(e.service_multiplier > 0.0 && e.service_multiplier.is_finite()) {
                return Err(Error::param(
                    "service_multipliers",
                    format!("{} must be > 0, got {}", e.id, e.service_multiplier),
                ));
            }
            if self.entries[..i].iter().any(|o| o.id == e.id) {
                return Err(Error::param("events", format!("duplicate event id {}", e.id)));
            }
        }
        if self.mix.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::param("mix", "components must be >= 0"));
        }
        let total: f64 = self.mix.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::param("mix", format!("components must sum to 1, got {total}")));
        }
        Ok(())
    }
}

/// One robot's call for operator attention.
#[derive(Clone, Debug, PartialEq)]
pub struct Request {
    pub robot_id: usize,
    pub event: EventId,
    pub arrival_time: f64,
    /// Created by a failed balk rather than a join.
    pub is_failure: bool,
    pub expected_service: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Discipline {
    #[default]
    Fifo,
    Sjf,
}

impl fmt::Display for Discipline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Discipline::Fifo => "fifo",
            Discipline::Sjf => "sjf",
        })
    }
}

/// Pending requests, excluding the one the operator is currently serving.
#[derive(Clone, Debug, Default)]
pub struct OperatorQueue {
    pending: VecDeque<Request>,
    discipline: Discipline,
}

impl OperatorQueue {
    pub fn new(discipline: Discipline) -> Self {
        OperatorQueue {
            pending: VecDeque::new(),
            discipline,
        }
    }

    pub fn discipline(&self) -> Discipline {
        self.discipline
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn pending(&self) -> impl Iterator<Item = &Request> {
        self.pending.iter()
    }

    pub fn contains_robot(&self, robot_id: usize) -> bool {
        self.pending.iter().any(|r| r.robot_id == robot_id)
    }

    /// Append `req`. A second request from the same robot is a simulator bug.
    pub fn enqueue(&mut self, req: Request) -> Result<()> {
        if self.contains_robot(req.robot_id) {
            return Err(Error::DuplicateRequest(req.robot_id));
        }
        self.pending.push_back(req);
        Ok(())
    }

    pub fn dequeue_next(&mut self) -> Result<Request> {
        let idx = match self.discipline {
            Discipline::Fifo => 0,
            Discipline::Sjf => {
                // strict `<` keeps the earliest arrival on ties
                let mut best = 0;
                for (i, r) in self.pending.iter().enumerate().skip(1) {
                    if r.expected_service < self.pending[best].expected_service {
                        best = i;
                    }
                }
                best
            }
        };
        self.pending.remove(idx).ok_or(Error::EmptyQueue)
    }
}

/// Largest queue length at which joining still pays: `floor(R * mu / C)`.
///
/// A threshold-following customer joins iff the number already in the
/// system is at most this value.
pub fn naor_threshold(reward: f64, wait_cost: f64, mu: f64) -> Result<u64> {
    if !(reward >= 0.0 && reward.is_finite()) {
        return Err(Error::param("reward", format!("must be >= 0, got {reward}")));
    }
    if !(wait_cost > 0.0 && wait_cost.is_finite()) {
        return Err(Error::param("wait_cost", format!("must be > 0, got {wait_cost}")));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::param("mu", format!("must be > 0, got {mu}")));
    }
    let ratio = reward * mu / wait_cost;
    // absorb representation error so exact ratios such as 2 / 0.1 land on 20
    Ok((ratio * (1.0 + 1e-12)).floor() as u64)
}
