//! Seeded discrete-event simulation of a robot team sharing one operator.
//!
//! Failure events arrive as a Poisson stream and land on a random robot that
//! is operating autonomously. That robot immediately joins the operator queue
//! or balks; a balk can fail, in which case the robot is forced into the
//! queue with a longer repair. One occurrence is processed per
//! [`Simulation::advance`] call, so the queue changes by at most one per step.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learning::reward::{episode_reward, LearningParams};
use crate::queue::{Discipline, EventCatalog, EventId, EventType, OperatorQueue, Request};
use crate::rng::{derive_rng, stream, SimRng};

/// How autonomous robots work through their task lists.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskProgress {
    /// One task finishes per `task_duration` of accumulated autonomous time.
    #[default]
    Deterministic,
    /// Tasks finish as a Poisson process with mean spacing `task_duration`.
    Exponential,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_robots: usize,
    pub n_tasks_total: usize,
    /// Event arrivals per simulated second.
    pub lambda: f64,
    /// Operator services per simulated second.
    pub mu: f64,
    /// Delivered events after which the episode stops generating arrivals.
    pub episode_event_horizon: usize,
    pub task_duration: f64,
    pub task_progress: TaskProgress,
    /// Service-time scale for requests created by a failed balk.
    pub fail_service_multiplier: f64,
    pub catalog: EventCatalog,
    pub discipline: Discipline,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_robots: 5,
            n_tasks_total: 30,
            lambda: 0.25,
            mu: 0.27,
            episode_event_horizon: 20,
            task_duration: 60.0,
            task_progress: TaskProgress::Deterministic,
            fail_service_multiplier: 2.0,
            catalog: EventCatalog::water_monitoring(),
            discipline: Discipline::Fifo,
            seed: 0,
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be > 0, got {v}")))
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        positive("lambda", self.lambda)?;
        positive("mu", self.mu)?;
        positive("task_duration", self.task_duration)?;
        if self.n_robots == 0 {
            return Err(Error::param("n_robots", "must be >= 1"));
        }
        if self.episode_event_horizon == 0 {
            return Err(Error::param("episode_event_horizon", "must be >= 1"));
        }
        if !(self.fail_service_multiplier >= 1.0 && self.fail_service_multiplier.is_finite()) {
            return Err(Error::param(
                "fail_service_multiplier",
                format!("must be >= 1, got {}", self.fail_service_multiplier),
            ));
        }
        self.catalog.validate()
    }

    /// Mean service time of a request for `event`.
    pub fn expected_service(&self, event: &EventType, is_failure: bool) -> f64 {
        let base = event.service_multiplier / self.mu;
        if is_failure {
            base * self.fail_service_multiplier
        } else {
            base
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RobotStatus {
    Autonomy,
    Event(EventId),
    Waiting,
    Failed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobotState {
    pub id: usize,
    pub status: RobotStatus,
    pub n_tasks: usize,
    /// Set while the robot is `Waiting` or `Failed`.
    pub idle_since: Option<f64>,
    pub idle_accum: f64,
    /// Autonomous time spent on the current task.
    pub progress: f64,
}

impl RobotState {
    fn new(id: usize, n_tasks: usize) -> Self {
        RobotState {
            id,
            status: RobotStatus::Autonomy,
            n_tasks,
            idle_since: None,
            idle_accum: 0.0,
            progress: 0.0,
        }
    }

    pub fn is_eligible(&self) -> bool {
        self.status == RobotStatus::Autonomy && self.n_tasks > 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimEventKind {
    Arrival,
    ServiceCompletion,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimEvent {
    pub time: f64,
    pub kind: SimEventKind,
}

#[derive(Debug)]
struct Scheduled {
    event: SimEvent,
    seq: u64,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        self.event
            .time
            .total_cmp(&other.event.time)
            .then(self.seq.cmp(&other.seq))
    }
}

/// Time-ordered event calendar; equal timestamps pop in insertion order.
#[derive(Debug, Default)]
pub struct Calendar {
    heap: BinaryHeap<Reverse<Scheduled>>,
    next_seq: u64,
}

impl Calendar {
    pub fn push(&mut self, event: SimEvent) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Scheduled { event, seq }));
    }

    pub fn peek(&self) -> Option<SimEvent> {
        self.heap.peek().map(|Reverse(s)| s.event)
    }

    pub fn pop(&mut self) -> Option<SimEvent> {
        self.heap.pop().map(|Reverse(s)| s.event)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpisodeMetrics {
    pub team_reward: f64,
    /// Join (or failure) to service completion, summed over robots.
    pub idle_time_total: f64,
    /// Join (or failure) to service start, summed over requests.
    pub queue_wait_total: f64,
    pub events_total: usize,
    pub failures_total: usize,
    pub joins_total: usize,
    pub balks_total: usize,
    pub arrivals_dropped: usize,
    pub tasks_completed: usize,
    pub episode_duration: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Join,
    Balk,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::Join, Action::Balk];

    pub fn index(self) -> usize {
        match self {
            Action::Join => 0,
            Action::Balk => 1,
        }
    }
}

/// What a deciding robot (or a team learner) can see at a decision epoch.
#[derive(Clone, Copy, Debug)]
pub struct DecisionView<'a> {
    pub robot_id: usize,
    pub event: &'a EventType,
    pub n_tasks: usize,
    /// Robots currently waiting on the operator, including the one in service.
    pub queue_len: usize,
    pub robots: &'a [RobotState],
}

/// Result of resolving one join/balk decision.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub robot_id: usize,
    pub event: EventId,
    pub action: Action,
    pub status_after: RobotStatus,
    /// Queue length seen at decision time, before this robot's own request.
    pub queue_len: usize,
    pub failed: bool,
    /// Expected service time of the event's request.
    pub t_serv: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Occurrence {
    /// An event landed on `robot_id`, which now has to decide.
    Decision { robot_id: usize, event: EventId },
    /// No robot could take the event.
    ArrivalDropped,
    ServiceCompleted { robot_id: usize },
}

/// A decision maker driven by [`run_episode`].
pub trait Agent {
    fn decide(&mut self, view: &DecisionView<'_>) -> Action;

    /// Called right after the decision returned by the preceding `decide`
    /// has been applied.
    fn observe(&mut self, _outcome: &Transition, _reward: f64) {}

    fn end_episode(&mut self) {}
}

/// Inverse-CDF exponential draw for a given uniform `u` in (0, 1).
pub fn exponential_from_uniform(u: f64, rate: f64) -> f64 {
    -u.ln() / rate
}

pub fn sample_exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::param("rate", format!("must be > 0, got {rate}")));
    }
    let u: f64 = rng.sample(Open01);
    Ok(exponential_from_uniform(u, rate))
}

/// Round-robin split of the task list; lower indices take the remainder.
pub fn assign_tasks(n_tasks_total: usize, n_robots: usize) -> Result<Vec<usize>> {
    if n_robots == 0 {
        return Err(Error::param("n_robots", "must be >= 1"));
    }
    let base = n_tasks_total / n_robots;
    let extra = n_tasks_total % n_robots;
    Ok((0..n_robots).map(|i| base + usize::from(i < extra)).collect())
}

/// Balks fail iff `u < fail_prob`.
pub fn balk_fails(u: f64, fail_prob: f64) -> bool {
    u < fail_prob
}

pub struct Simulation {
    config: SimConfig,
    clock: f64,
    robots: Vec<RobotState>,
    queue: OperatorQueue,
    in_service: Option<Request>,
    calendar: Calendar,
    arrivals_open: bool,
    tasks_initial: usize,
    metrics: EpisodeMetrics,
    arrival_rng: SimRng,
    service_rng: SimRng,
    decision_rng: SimRng,
    task_rng: SimRng,
}

impl Simulation {
    pub fn new(config: &SimConfig) -> Result<Self> {
        let mut sim = Self::with_calendar(config, Vec::new())?;
        sim.schedule_arrival()?;
        Ok(sim)
    }

    /// Start from the given calendar instead of drawing the first arrival.
    pub fn with_calendar(config: &SimConfig, events: Vec<SimEvent>) -> Result<Self> {
        config.validate()?;
        let seed = config.seed;
        let robots: Vec<RobotState> = assign_tasks(config.n_tasks_total, config.n_robots)?
            .into_iter()
            .enumerate()
            .map(|(id, n)| RobotState::new(id, n))
            .collect();
        let mut sim = Simulation {
            config: config.clone(),
            clock: 0.0,
            tasks_initial: config.n_tasks_total,
            robots,
            queue: OperatorQueue::new(config.discipline),
            in_service: None,
            calendar: Calendar::default(),
            arrivals_open: true,
            metrics: EpisodeMetrics::default(),
            arrival_rng: derive_rng(seed, stream::ARRIVALS, 0),
            service_rng: derive_rng(seed, stream::SERVICE, 0),
            decision_rng: derive_rng(seed, stream::DECISIONS, 0),
            task_rng: derive_rng(seed, stream::TASKS, 0),
        };
        for e in events {
            sim.schedule(e)?;
        }
        Ok(sim)
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn robots(&self) -> &[RobotState] {
        &self.robots
    }

    pub fn queue(&self) -> &OperatorQueue {
        &self.queue
    }

    pub fn in_service(&self) -> Option<&Request> {
        self.in_service.as_ref()
    }

    pub fn calendar(&self) -> &Calendar {
        &self.calendar
    }

    pub fn metrics(&self) -> &EpisodeMetrics {
        &self.metrics
    }

    pub fn tasks_initial(&self) -> usize {
        self.tasks_initial
    }

    pub fn tasks_remaining(&self) -> usize {
        self.robots.iter().map(|r| r.n_tasks).sum()
    }

    /// Robots waiting on the operator, counting the one being served.
    pub fn queue_len(&self) -> usize {
        self.queue.len() + usize::from(self.in_service.is_some())
    }

    /// Insert an entry into the event calendar.
    pub fn schedule(&mut self, event: SimEvent) -> Result<()> {
        if event.time < self.clock || !event.time.is_finite() {
            return Err(Error::Logic(format!(
                "event at {} scheduled before clock {}",
                event.time, self.clock
            )));
        }
        self.calendar.push(event);
        Ok(())
    }

    fn schedule_arrival(&mut self) -> Result<()> {
        let dt = sample_exponential(&mut self.arrival_rng, self.config.lambda)?;
        self.schedule(SimEvent {
            time: self.clock + dt,
            kind: SimEventKind::Arrival,
        })
    }

    pub fn view(&self, robot_id: usize) -> Result<DecisionView<'_>> {
        let robot = self
            .robots
            .get(robot_id)
            .ok_or_else(|| Error::Logic(format!("no robot {robot_id}")))?;
        let RobotStatus::Event(id) = robot.status else {
            return Err(Error::Logic(format!("robot {robot_id} is not facing an event")));
        };
        let event = self
            .config
            .catalog
            .get(id)
            .ok_or_else(|| Error::Logic(format!("unknown event {id}")))?;
        Ok(DecisionView {
            robot_id,
            event,
            n_tasks: robot.n_tasks,
            queue_len: self.queue_len(),
            robots: &self.robots,
        })
    }

    fn progress_tasks(&mut self, dt: f64) {
        if dt <= 0.0 {
            return;
        }
        let duration = self.config.task_duration;
        for robot in self.robots.iter_mut().filter(|r| r.is_eligible()) {
            let done = match self.config.task_progress {
                TaskProgress::Deterministic => {
                    robot.progress += dt;
                    let mut done = 0;
                    while robot.progress >= duration && done < robot.n_tasks {
                        robot.progress -= duration;
                        done += 1;
                    }
                    done
                }
                TaskProgress::Exponential => match Poisson::new(dt / duration) {
                    Ok(p) => p.sample(&mut self.task_rng) as usize,
                    Err(_) => 0,
                },
            };
            let done = done.min(robot.n_tasks);
            robot.n_tasks -= done;
            self.metrics.tasks_completed += done;
            if robot.n_tasks == 0 {
                robot.progress = 0.0;
            }
        }
    }

    fn start_service(&mut self, req: Request) -> Result<()> {
        let duration = sample_exponential(&mut self.service_rng, 1.0 / req.expected_service)?;
        self.metrics.queue_wait_total += self.clock - req.arrival_time;
        self.in_service = Some(req);
        self.schedule(SimEvent {
            time: self.clock + duration,
            kind: SimEventKind::ServiceCompletion,
        })
    }

    /// Process the earliest calendar entry. `None` once the episode is over.
    pub fn advance(&mut self) -> Result<Option<Occurrence>> {
        let Some(event) = self.calendar.pop() else {
            return Ok(None);
        };
        if event.time < self.clock {
            return Err(Error::Logic("calendar went backwards".into()));
        }
        self.progress_tasks(event.time - self.clock);
        self.clock = event.time;
        self.metrics.episode_duration = self.clock;
        match event.kind {
            SimEventKind::Arrival => self.on_arrival().map(Some),
            SimEventKind::ServiceCompletion => self.on_completion().map(Some),
        }
    }

    fn on_arrival(&mut self) -> Result<Occurrence> {
        let eligible: Vec<usize> = self
            .robots
            .iter()
            .filter(|r| r.is_eligible())
            .map(|r| r.id)
            .collect();
        if eligible.is_empty() {
            self.metrics.arrivals_dropped += 1;
            if self.tasks_remaining() == 0 {
                self.arrivals_open = false;
            }
            if self.arrivals_open {
                self.schedule_arrival()?;
            }
            return Ok(Occurrence::ArrivalDropped);
        }
        let robot_id = eligible[self.decision_rng.random_range(0..eligible.len())];
        let idx = self.config.catalog.pick(self.decision_rng.random::<f64>());
        let event = self.config.catalog.entries[idx].id;
        self.robots[robot_id].status = RobotStatus::Event(event);
        self.metrics.events_total += 1;
        if self.metrics.events_total >= self.config.episode_event_horizon {
            self.arrivals_open = false;
        }
        if self.arrivals_open {
            self.schedule_arrival()?;
        }
        Ok(Occurrence::Decision { robot_id, event })
    }

    fn on_completion(&mut self) -> Result<Occurrence> {
        let req = self
            .in_service
            .take()
            .ok_or_else(|| Error::Logic("service completion with idle operator".into()))?;
        let clock = self.clock;
        let robot = &mut self.robots[req.robot_id];
        let since = robot
            .idle_since
            .take()
            .ok_or_else(|| Error::Logic(format!("robot {} served while not idle", req.robot_id)))?;
        robot.idle_accum += clock - since;
        robot.status = RobotStatus::Autonomy;
        self.metrics.idle_time_total += clock - since;
        if !self.queue.is_empty() {
            let next = self.queue.dequeue_next()?;
            self.start_service(next)?;
        }
        Ok(Occurrence::ServiceCompleted {
            robot_id: req.robot_id,
        })
    }

    fn submit(&mut self, req: Request) -> Result<()> {
        if self.in_service.is_none() {
            self.start_service(req)
        } else {
            self.queue.enqueue(req)
        }
    }

    /// Resolve a robot's decision, drawing the balk outcome from the
    /// simulation's decision stream.
    pub fn apply_decision(&mut self, robot_id: usize, action: Action) -> Result<Transition> {
        let u: f64 = match action {
            Action::Balk => self.decision_rng.random(),
            Action::Join => 0.0,
        };
        self.apply_decision_with_draw(robot_id, action, u)
    }

    /// [`Simulation::apply_decision`] with the balk draw `u` in `[0, 1)` given.
    pub fn apply_decision_with_draw(
        &mut self,
        robot_id: usize,
        action: Action,
        u: f64,
    ) -> Result<Transition> {
        let status = self
            .robots
            .get(robot_id)
            .map(|r| r.status)
            .ok_or_else(|| Error::Logic(format!("no robot {robot_id}")))?;
        let RobotStatus::Event(id) = status else {
            return Err(Error::Logic(format!(
                "robot {robot_id} decided while in {status:?}"
            )));
        };
        let event = self
            .config
            .catalog
            .get(id)
            .cloned()
            .ok_or_else(|| Error::Logic(format!("unknown event {id}")))?;
        let queue_len = self.queue_len();
        let t_serv = self.config.expected_service(&event, false);
        let clock = self.clock;
        let (status_after, failed) = match action {
            Action::Join => {
                self.metrics.joins_total += 1;
                (RobotStatus::Waiting, false)
            }
            Action::Balk => {
                self.metrics.balks_total += 1;
                if balk_fails(u, event.fail_prob) {
                    self.metrics.failures_total += 1;
                    (RobotStatus::Failed, true)
                } else {
                    (RobotStatus::Autonomy, false)
                }
            }
        };
        let robot = &mut self.robots[robot_id];
        robot.status = status_after;
        if status_after != RobotStatus::Autonomy {
            robot.idle_since = Some(clock);
            let expected_service = self.config.expected_service(&event, failed);
            self.submit(Request {
                robot_id,
                event: id,
                arrival_time: clock,
                is_failure: failed,
                expected_service,
            })?;
        }
        Ok(Transition {
            robot_id,
            event: id,
            action,
            status_after,
            queue_len,
            failed,
            t_serv,
        })
    }

    pub fn add_reward(&mut self, reward: f64) {
        self.metrics.team_reward += reward;
    }

    /// Check the bookkeeping invariants; returns a description of the first
    /// violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let idle = self
            .robots
            .iter()
            .filter(|r| matches!(r.status, RobotStatus::Waiting | RobotStatus::Failed))
            .count();
        let in_service = usize::from(self.in_service.is_some());
        if self.queue.len() + in_service != idle {
            return Err(format!(
                "queue {} + in service {} != idle robots {}",
                self.queue.len(),
                in_service,
                idle
            ));
        }
        for r in &self.robots {
            let should_idle = matches!(r.status, RobotStatus::Waiting | RobotStatus::Failed);
            if r.idle_since.is_some() != should_idle {
                return Err(format!("robot {} idle_since inconsistent with {:?}", r.id, r.status));
            }
        }
        if self.metrics.tasks_completed + self.tasks_remaining() != self.tasks_initial {
            return Err("task conservation violated".into());
        }
        let accum: f64 = self.robots.iter().map(|r| r.idle_accum).sum();
        if (accum - self.metrics.idle_time_total).abs() > 1e-9 * (1.0 + accum.abs()) {
            return Err("idle accumulators disagree with metrics".into());
        }
        Ok(())
    }

    pub fn into_metrics(self) -> EpisodeMetrics {
        self.metrics
    }
}

/// Run one episode to completion: deliver events until the horizon, then
/// let the operator drain whatever is still queued.
pub fn run_episode(
    config: &SimConfig,
    params: &LearningParams,
    agent: &mut dyn Agent,
) -> Result<EpisodeMetrics> {
    let mut sim = Simulation::new(config)?;
    while let Some(occ) = sim.advance()? {
        if let Occurrence::Decision { robot_id, .. } = occ {
            let action = agent.decide(&sim.view(robot_id)?);
            let outcome = sim.apply_decision(robot_id, action)?;
            let reward = episode_reward(&outcome, params);
            sim.add_reward(reward);
            agent.observe(&outcome, reward);
        }
    }
    agent.end_episode();
    Ok(sim.into_metrics())
}
