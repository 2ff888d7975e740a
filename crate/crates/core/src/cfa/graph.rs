use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use super::Label;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge {0}->{1} references a label that is not a node")]
    DanglingEdge(Label, Label),
    #[error("{0} label {1} is not a node")]
    MissingEndpoint(&'static str, Label),
    #[error("end label {end} is unreachable from start {start}")]
    Unreachable { start: Label, end: Label },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Expected control flow: legal checkpoint transitions plus start and end labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControlFlowGraph {
    nodes: BTreeSet<Label>,
    edges: BTreeSet<(Label, Label)>,
    start: Label,
    end: Label,
}

impl ControlFlowGraph {
    pub fn new(
        nodes: impl IntoIterator<Item = Label>,
        edges: impl IntoIterator<Item = (Label, Label)>,
        start: Label,
        end: Label,
    ) -> Result<Self, GraphError> {
        let nodes: BTreeSet<Label> = nodes.into_iter().collect();
        let edges: BTreeSet<(Label, Label)> = edges.into_iter().collect();
        for &(a, b) in &edges {
            if !nodes.contains(&a) || !nodes.contains(&b) {
                return Err(GraphError::DanglingEdge(a, b));
            }
        }
        if !nodes.contains(&start) {
            return Err(GraphError::MissingEndpoint("start", start));
        }
        if !nodes.contains(&end) {
            return Err(GraphError::MissingEndpoint("end", end));
        }
        let graph = Self {
            nodes,
            edges,
            start,
            end,
        };
        if !graph.reachable(start, end) {
            return Err(GraphError::Unreachable { start, end });
        }
        Ok(graph)
    }

    fn linear(path: &[Label], extra: &[(Label, Label)]) -> Self {
        let edges = path
            .windows(2)
            .map(|w| (w[0], w[1]))
            .chain(extra.iter().copied());
        Self::new(path.iter().copied(), edges, path[0], path[path.len() - 1])
            .expect("built-in graph is valid")
    }

    /// `ROUND_START → TRAIN_BEGIN → TRAIN_END → UPDATE_HASHED → UPDATE_SIGNED → UPDATE_SENT → ROUND_END`.
    pub fn default_client() -> Self {
        Self::linear(&Self::client_path(), &[])
    }

    /// `ROUND_START → SERVER_RECEIVED (self-loop) → SERVER_VERIFIED → AGGREGATED → GLOBAL_APPLIED → ROUND_END`.
    pub fn default_server() -> Self {
        Self::linear(
            &[
                Label::RoundStart,
                Label::ServerReceived,
                Label::ServerVerified,
                Label::Aggregated,
                Label::GlobalApplied,
                Label::RoundEnd,
            ],
            &[(Label::ServerReceived, Label::ServerReceived)],
        )
    }

    /// Label sequence an honest client emits in one round.
    pub fn client_path() -> [Label; 7] {
        [
            Label::RoundStart,
            Label::TrainBegin,
            Label::TrainEnd,
            Label::UpdateHashed,
            Label::UpdateSigned,
            Label::UpdateSent,
            Label::RoundEnd,
        ]
    }

    pub fn start(&self) -> Label {
        self.start
    }

    pub fn end(&self) -> Label {
        self.end
    }

    pub fn nodes(&self) -> &BTreeSet<Label> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(Label, Label)> {
        &self.edges
    }

    pub fn has_edge(&self, from: Label, to: Label) -> bool {
        self.edges.contains(&(from, to))
    }

    fn reachable(&self, from: Label, to: Label) -> bool {
        let mut seen = BTreeSet::from([from]);
        let mut queue = VecDeque::from([from]);
        while let Some(n) = queue.pop_front() {
            if n == to {
                return true;
            }
            for &(a, b) in &self.edges {
                if a == n && seen.insert(b) {
                    queue.push_back(b);
                }
            }
        }
        false
    }

    /// Parses the text form:
    ///
    /// ```text
    /// nodes = ROUND_START, TRAIN_BEGIN, ROUND_END
    /// edges = ROUND_START->TRAIN_BEGIN, TRAIN_BEGIN->ROUND_END
    /// start = ROUND_START
    /// end = ROUND_END
    /// ```
    ///
    /// `nodes` and `edges` may repeat; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        let mut start = None;
        let mut end = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| GraphError::Parse {
                line: line_no,
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            let items = value.split(',').map(str::trim).filter(|s| !s.is_empty());
            match key.trim() {
                "nodes" => {
                    for item in items {
                        nodes.push(item.parse::<Label>().map_err(err)?);
                    }
                }
                "edges" => {
                    for item in items {
                        let (a, b) = item
                            .split_once("->")
                            .ok_or_else(|| err(format!("edge {item:?} is not FROM->TO")))?;
                        let a = a.trim().parse::<Label>().map_err(err)?;
                        let b = b.trim().parse::<Label>().map_err(err)?;
                        edges.push((a, b));
                    }
                }
                "start" => start = Some(value.trim().parse::<Label>().map_err(err)?),
                "end" => end = Some(value.trim().parse::<Label>().map_err(err)?),
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        let last = text.lines().count();
        let start = start.ok_or(GraphError::Parse {
            line: last,
            message: "missing start".into(),
        })?;
        let end = end.ok_or(GraphError::Parse {
            line: last,
            message: "missing end".into(),
        })?;
        Self::new(nodes, edges, start, end)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let nodes: Vec<&str> = self.nodes.iter().map(|l| l.name()).collect();
        let edges: Vec<String> = self
            .edges
            .iter()
            .map(|(a, b)| format!("{a}->{b}"))
            .collect();
        writeln!(out, "nodes = {}", nodes.join(", ")).unwrap();
        writeln!(out, "edges = {}", edges.join(", ")).unwrap();
        writeln!(out, "start = {}", self.start).unwrap();
        writeln!(out, "end = {}", self.end).unwrap();
        out
    }
}

/// Point check: `true` iff `current` may follow `prev` (or opens the trace).
pub fn cfa_check(graph: &ControlFlowGraph, prev: Option<Label>, current: Label) -> bool {
    match prev {
        None => current == graph.start(),
        Some(prev) => graph.has_edge(prev, current),
    }
}
