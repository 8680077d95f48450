//! Prompt rendering and reply parsing for LLM-backed agents.
//!
//! Prompts follow the `## Input` / `## Process` / `## Output` layout with
//! `Node Id`, `State`, `Neighbor Information` and `Received Messages`
//! sections. Replies must carry an `## Output` block of numbered
//! `field: value` lines; a fenced JSON block is accepted as a fallback.

use std::fmt::Write as _;
use std::sync::OnceLock;

use regex::Regex;

use super::{Phase, PhaseOutput, PhaseRequest};
use crate::graph::NodeId;
use crate::programs::VertexProgram;
use crate::value::{Record, Schema, Value, ValueKind};

pub(crate) const PARADIGM: &str = "\
You are one agent in a network of agents, one per graph node. All agents run the same \
distributed algorithm in synchronized rounds. In each round every agent receives the \
messages its neighbors sent in the previous round, updates its own state from those \
messages and its current state, and then sends new messages to its neighbors. An agent \
only knows its own state, its neighbors, and the messages it receives. The algorithm is \
given by six parts: State, Message, Initialization, Send, Update and Termination.";

/// System message: the paradigm plus the program's six-section template.
pub fn system_prompt(program: &dyn VertexProgram) -> String {
    let params = program.params();
    let mut out = format!("{PARADIGM}\n\n{}", program.template());
    if !params.is_empty() {
        out.push_str("### Parameters\n");
        for (k, v) in params.iter() {
            let _ = writeln!(out, "- {k}: {v}");
        }
    }
    out
}

fn output_layout(phase: Phase, program: &dyn VertexProgram) -> String {
    let placeholders = |schema: &Schema| {
        schema
            .fields()
            .iter()
            .enumerate()
            .map(|(i, f)| format!("{}. {}: <{}>", i + 1, f.name, f.kind.describe()))
            .collect::<Vec<_>>()
            .join("\n")
    };
    match phase {
        Phase::Init | Phase::Update => format!("State:\n{}", placeholders(program.state_schema())),
        Phase::Send => format!(
            "Message sent to Node <neighbor id>:\n{}\n(repeat the block for every recipient; write \"No messages\" if the rules send nothing)",
            placeholders(program.message_schema())
        ),
    }
}

/// User message for one agent and one phase.
pub fn render_phase_prompt(req: &PhaseRequest<'_>) -> String {
    let agent = req.agent;
    let program = req.program;
    let mut out = String::new();
    let _ = writeln!(out, "Phase: {}", req.phase);
    let _ = writeln!(out, "Round: {}", agent.round);
    out.push_str("## Input\n");
    let _ = writeln!(out, "Node Id: {}", agent.id);
    let _ = writeln!(out, "Total Nodes: {}", agent.node_count);
    if let Some(w) = agent.node_weight {
        let _ = writeln!(out, "Node Weight: {w}");
    }
    if let Some(feat) = agent.feature {
        let _ = writeln!(out, "Node Feature: {feat}");
    }
    if let Some(state) = req.state {
        let _ = writeln!(out, "State:\n{}", program.state_schema().render(state));
    }
    out.push_str("Neighbor Information:\n");
    out.push_str(if agent.directed { "Edges to:\n" } else { "Connected to:\n" });
    if agent.neighbors.is_empty() {
        out.push_str("None\n");
    }
    for n in agent.neighbors {
        match n.weight {
            Some(w) => {
                let _ = writeln!(out, "Node {} (edge weight: {w})", n.id);
            }
            None => {
                let _ = writeln!(out, "Node {}", n.id);
            }
        }
    }
    if agent.directed {
        out.push_str("Edges from:\n");
        if agent.in_neighbors.is_empty() {
            out.push_str("None\n");
        }
        for n in agent.in_neighbors {
            let _ = writeln!(out, "Node {}", n.id);
        }
    }
    if let Some(agg) = agent.aggregate {
        let _ = writeln!(out, "Global Value: {agg}");
    }
    if req.phase == Phase::Update {
        out.push_str("Received Messages:\n");
        if req.inbox.is_empty() {
            out.push_str("None\n");
        }
        for (i, e) in req.inbox.iter().enumerate() {
            let _ = writeln!(
                out,
                "Message {} (from Node {}):\n{}",
                i + 1,
                e.sender,
                program.message_schema().render(&e.payload)
            );
        }
    }
    let _ = write!(
        out,
        "## Task\nApply the {} rules of the algorithm to this node. Reason step by step under \"## Process\", then give the result under \"## Output\" in exactly this layout:\n{}\n",
        req.phase,
        output_layout(req.phase, program)
    );
    out
}

/// Follow-up message after an unusable reply.
pub fn correction_prompt(req: &PhaseRequest<'_>, reply: &str, error: &str) -> String {
    format!(
        "Your previous reply could not be used: {error}\nPrevious reply:\n{reply}\n\nReply again. The \"## Output\" block must use exactly this layout and only these fields:\n{}\n",
        output_layout(req.phase, req.program)
    )
}

fn field_line_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(?:\d+\.\s*)?`?([A-Za-z_][A-Za-z0-9_]*)`?\s*:\s*(.*?)\s*$").unwrap())
}

fn message_header_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^message sent to node\s+(\d+)\s*:?\s*$").unwrap())
}

fn fenced_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)```(?:json)?\s*(\{.*?\})\s*```").unwrap())
}

fn output_block(reply: &str) -> Option<&str> {
    let lower = reply.to_ascii_lowercase();
    lower.rfind("## output").map(|i| &reply[i + "## output".len()..])
}

fn parse_fields(schema: &Schema, lines: &[&str]) -> Result<Record, String> {
    let mut record = Record::new();
    for line in lines {
        let Some(cap) = field_line_re().captures(line) else {
            return Err(format!("unrecognized line `{line}`"));
        };
        let name = &cap[1];
        let kind = schema.kind_of(name).ok_or_else(|| format!("unknown field `{name}`"))?;
        let value = Value::parse(kind, &cap[2]).map_err(|e| format!("field `{name}`: {e}"))?;
        record.set(name, value);
    }
    schema.validate(&record).map_err(|e| e.to_string())?;
    Ok(record)
}

fn parse_state(schema: &Schema, block: &str) -> Result<Record, String> {
    let lines: Vec<&str> =
        block.lines().map(str::trim).filter(|l| !l.is_empty() && !l.eq_ignore_ascii_case("state:")).collect();
    parse_fields(schema, &lines)
}

fn parse_messages(req: &PhaseRequest<'_>, block: &str) -> Result<Vec<(NodeId, Record)>, String> {
    let schema = req.program.message_schema();
    let mut out = Vec::new();
    let mut current: Option<(NodeId, Vec<&str>)> = None;
    for line in block.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if line.to_ascii_lowercase().starts_with("no messages") {
            continue;
        }
        if let Some(cap) = message_header_re().captures(line) {
            if let Some((to, lines)) = current.take() {
                out.push((to, parse_fields(schema, &lines)?));
            }
            let to: NodeId = cap[1].parse().map_err(|_| format!("bad recipient in `{line}`"))?;
            current = Some((to, Vec::new()));
            continue;
        }
        match current.as_mut() {
            Some((_, lines)) => lines.push(line),
            None => return Err(format!("field line outside a message block: `{line}`")),
        }
    }
    if let Some((to, lines)) = current {
        out.push((to, parse_fields(schema, &lines)?));
    }
    if let Some((to, _)) = out.iter().find(|(to, _)| !req.agent.is_neighbor(*to)) {
        return Err(format!("node {to} is not a neighbor of node {}", req.agent.id));
    }
    Ok(out)
}

fn json_to_text(kind: ValueKind, v: &serde_json::Value) -> String {
    match (kind, v) {
        (_, serde_json::Value::String(s)) => s.clone(),
        (_, serde_json::Value::Null) => "unset".into(),
        (ValueKind::WeightedNodes, serde_json::Value::Array(items)) => {
            let parts: Vec<String> = items
                .iter()
                .map(|p| match p.as_array() {
                    Some(pair) if pair.len() == 2 => format!("({}, {})", pair[0], pair[1]),
                    _ => p.to_string(),
                })
                .collect();
            format!("[{}]", parts.join(", "))
        }
        (_, other) => other.to_string(),
    }
}

fn record_from_json(schema: &Schema, obj: &serde_json::Value) -> Result<Record, String> {
    let map = obj.as_object().ok_or("expected a JSON object")?;
    let mut record = Record::new();
    for (name, v) in map {
        let kind = schema.kind_of(name).ok_or_else(|| format!("unknown field `{name}`"))?;
        let value = Value::parse(kind, &json_to_text(kind, v)).map_err(|e| format!("field `{name}`: {e}"))?;
        record.set(name, value);
    }
    schema.validate(&record).map_err(|e| e.to_string())?;
    Ok(record)
}

fn parse_fenced(req: &PhaseRequest<'_>, reply: &str) -> Result<PhaseOutput, String> {
    let cap = fenced_re().captures(reply).ok_or("reply has no \"## Output\" block")?;
    let doc: serde_json::Value = serde_json::from_str(&cap[1]).map_err(|e| format!("fenced block is not JSON: {e}"))?;
    match req.phase {
        Phase::Init | Phase::Update => {
            let obj = doc.get("state").unwrap_or(&doc);
            record_from_json(req.program.state_schema(), obj).map(PhaseOutput::State)
        }
        Phase::Send => {
            let items = doc.get("messages").and_then(|m| m.as_array()).ok_or("fenced block has no `messages` array")?;
            let mut out = Vec::new();
            for item in items {
                let to = item
                    .get("to")
                    .and_then(|t| t.as_u64())
                    .and_then(|t| NodeId::try_from(t).ok())
                    .ok_or("message without a numeric `to`")?;
                if !req.agent.is_neighbor(to) {
                    return Err(format!("node {to} is not a neighbor of node {}", req.agent.id));
                }
                let payload = item.get("payload").ok_or("message without `payload`")?;
                out.push((to, record_from_json(req.program.message_schema(), payload)?));
            }
            Ok(PhaseOutput::Messages(out))
        }
    }
}

/// Extracts the phase result from a model reply.
pub fn parse_reply(req: &PhaseRequest<'_>, reply: &str) -> Result<PhaseOutput, String> {
    let Some(block) = output_block(reply) else {
        return parse_fenced(req, reply);
    };
    match req.phase {
        Phase::Init | Phase::Update => parse_state(req.program.state_schema(), block).map(PhaseOutput::State),
        Phase::Send => parse_messages(req, block).map(PhaseOutput::Messages),
    }
}

/// Formats a phase result the way a well-behaved agent would reply.
pub fn render_reply(phase: Phase, program: &dyn VertexProgram, output: &PhaseOutput) -> String {
    let mut out = format!("## Process\nApplied the {phase} rules to the input.\n## Output\n");
    match output {
        PhaseOutput::State(s) => {
            let _ = writeln!(out, "State:\n{}", program.state_schema().render(s));
        }
        PhaseOutput::Messages(msgs) if msgs.is_empty() => out.push_str("No messages\n"),
        PhaseOutput::Messages(msgs) => {
            for (to, payload) in msgs {
                let _ = writeln!(out, "Message sent to Node {to}:\n{}", program.message_schema().render(payload));
            }
        }
    }
    out
}
