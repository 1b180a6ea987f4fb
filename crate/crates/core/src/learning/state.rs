//! State encodings for the team learner and the two independent learners.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::queue::EventId;
use crate::sim::{DecisionView, RobotState, RobotStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    /// One learner over the joint state of every robot.
    #[serde(rename = "tl")]
    Tl,
    /// One learner per robot, local state only.
    #[serde(rename = "il-u")]
    IlU,
    /// One learner per robot, local state plus queue length.
    #[serde(rename = "il-o")]
    IlO,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Tl, ModelKind::IlU, ModelKind::IlO];

    pub fn tag(self) -> &'static str {
        match self {
            ModelKind::Tl => "tl",
            ModelKind::IlU => "il-u",
            ModelKind::IlO => "il-o",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Tl => "TL",
            ModelKind::IlU => "IL-U",
            ModelKind::IlO => "IL-O",
        }
    }

    /// Number of Q-tables a team of `n_robots` needs under this model.
    pub fn n_tables(self, n_robots: usize) -> usize {
        match self {
            ModelKind::Tl => 1,
            ModelKind::IlU | ModelKind::IlO => n_robots,
        }
    }

    /// Which table learns from `robot_id`'s decisions.
    pub fn owner(self, robot_id: usize) -> usize {
        match self {
            ModelKind::Tl => 0,
            ModelKind::IlU | ModelKind::IlO => robot_id,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tl" => Ok(ModelKind::Tl),
            "il-u" | "il_u" | "ilu" => Ok(ModelKind::IlU),
            "il-o" | "il_o" | "ilo" => Ok(ModelKind::IlO),
            other => Err(Error::Usage(format!("unknown model `{other}` (expected tl, il-u or il-o)"))),
        }
    }
}

/// Robot status as it appears inside a state key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StatusTag {
    Event(EventId),
    Waiting,
    Failed,
    Autonomy,
}

impl From<RobotStatus> for StatusTag {
    fn from(s: RobotStatus) -> Self {
        match s {
            RobotStatus::Event(e) => StatusTag::Event(e),
            RobotStatus::Waiting => StatusTag::Waiting,
            RobotStatus::Failed => StatusTag::Failed,
            RobotStatus::Autonomy => StatusTag::Autonomy,
        }
    }
}

impl fmt::Display for StatusTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatusTag::Event(e) => write!(f, "{e}"),
            StatusTag::Waiting => f.write_str("W"),
            StatusTag::Failed => f.write_str("F"),
            StatusTag::Autonomy => f.write_str("A"),
        }
    }
}

impl FromStr for StatusTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "W" => Ok(StatusTag::Waiting),
            "F" => Ok(StatusTag::Failed),
            "A" => Ok(StatusTag::Autonomy),
            _ => s
                .strip_prefix('E')
                .and_then(|n| n.parse::<u8>().ok())
                .map(|n| StatusTag::Event(EventId(n)))
                .ok_or_else(|| format!("bad status `{s}`")),
        }
    }
}

/// `<S_b, N_tasks>` for one robot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalKey {
    pub status: StatusTag,
    pub n_tasks: u32,
}

impl LocalKey {
    pub fn new(status: impl Into<StatusTag>, n_tasks: usize) -> Self {
        LocalKey {
            status: status.into(),
            n_tasks: n_tasks as u32,
        }
    }
}

impl From<&RobotState> for LocalKey {
    fn from(r: &RobotState) -> Self {
        LocalKey::new(r.status, r.n_tasks)
    }
}

impl fmt::Display for LocalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.status, self.n_tasks)
    }
}

impl FromStr for LocalKey {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (status, tasks) = s.split_once(':').ok_or_else(|| format!("bad local state `{s}`"))?;
        Ok(LocalKey {
            status: status.parse()?,
            n_tasks: tasks.parse().map_err(|_| format!("bad task count in `{s}`"))?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateKey {
    IlU(LocalKey),
    IlO(LocalKey, u32),
    Tl(Box<[LocalKey]>),
}

impl StateKey {
    pub fn model(&self) -> ModelKind {
        match self {
            StateKey::IlU(_) => ModelKind::IlU,
            StateKey::IlO(..) => ModelKind::IlO,
            StateKey::Tl(_) => ModelKind::Tl,
        }
    }

    pub fn parse(model: ModelKind, s: &str) -> std::result::Result<Self, String> {
        match model {
            ModelKind::IlU => Ok(StateKey::IlU(s.parse()?)),
            ModelKind::IlO => {
                let (local, q) = s.rsplit_once(':').ok_or_else(|| format!("bad IL-O state `{s}`"))?;
                let q = q.parse().map_err(|_| format!("bad queue length in `{s}`"))?;
                Ok(StateKey::IlO(local.parse()?, q))
            }
            ModelKind::Tl => s
                .split('|')
                .map(str::parse)
                .collect::<std::result::Result<Vec<LocalKey>, _>>()
                .map(|v| StateKey::Tl(v.into_boxed_slice())),
        }
    }
}

impl fmt::Display for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateKey::IlU(l) => write!(f, "{l}"),
            StateKey::IlO(l, q) => write!(f, "{l}:{q}"),
            StateKey::Tl(all) => {
                for (i, l) in all.iter().enumerate() {
                    if i > 0 {
                        f.write_str("|")?;
                    }
                    write!(f, "{l}")?;
                }
                Ok(())
            }
        }
    }
}

/// Build the key a learner of kind `model` sees.
///
/// The queue feature is capped at `n_robots`. The team learner needs the
/// joint view and does not get an explicit queue feature: the number of
/// waiting robots is already part of the joint state.
pub fn encode_state(
    local: LocalKey,
    queue_len: usize,
    joint: Option<&[RobotState]>,
    model: ModelKind,
    n_robots: usize,
) -> Result<StateKey> {
    Ok(match model {
        ModelKind::IlU => StateKey::IlU(local),
        ModelKind::IlO => StateKey::IlO(local, queue_len.min(n_robots) as u32),
        ModelKind::Tl => {
            let joint = joint.ok_or_else(|| {
                Error::InvalidInput("team learner state needs the joint observation".into())
            })?;
            StateKey::Tl(joint.iter().map(LocalKey::from).collect())
        }
    })
}

pub fn encode_view(view: &DecisionView<'_>, model: ModelKind) -> StateKey {
    let local = LocalKey::new(StatusTag::Event(view.event.id), view.n_tasks);
    match model {
        ModelKind::IlU => StateKey::IlU(local),
        ModelKind::IlO => StateKey::IlO(local, view.queue_len.min(view.robots.len()) as u32),
        ModelKind::Tl => StateKey::Tl(view.robots.iter().map(LocalKey::from).collect()),
    }
}
