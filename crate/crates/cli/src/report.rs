//! Report assembly. Key order is fixed so that reports are byte-stable.

use serde_json::{json, Map, Value};

use bionet_core::explicit::Answer;
use bionet_core::{AcceleratedSequence, Marking, Net};

/// Exit status carried by a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Answered,
    /// Unknown-capped, unstable, or disagreements found.
    Inconclusive,
}

impl Status {
    pub fn of(answer: Answer) -> Status {
        match answer {
            Answer::UnknownCapped => Status::Inconclusive,
            _ => Status::Answered,
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Answered => 0,
            Status::Inconclusive => 2,
        }
    }
}

pub struct Report {
    command: &'static str,
    net: Option<String>,
    query: Map<String, Value>,
    params: Map<String, Value>,
    result: Map<String, Value>,
    warnings: Vec<String>,
    pub status: Status,
}

impl Report {
    pub fn new(command: &'static str, net: Option<&Net>) -> Self {
        Report {
            command,
            net: net.map(|n| n.name().to_string()),
            query: Map::new(),
            params: Map::new(),
            result: Map::new(),
            warnings: Vec::new(),
            status: Status::Answered,
        }
    }

    pub fn query(&mut self, key: &str, value: Value) -> &mut Self {
        self.query.insert(key.into(), value);
        self
    }

    pub fn param(&mut self, key: &str, value: Value) -> &mut Self {
        self.params.insert(key.into(), value);
        self
    }

    pub fn result(&mut self, key: &str, value: Value) -> &mut Self {
        self.result.insert(key.into(), value);
        self
    }

    pub fn warn(&mut self, message: impl Into<String>) -> &mut Self {
        self.warnings.push(message.into());
        self
    }

    pub fn inconclusive(&mut self) -> &mut Self {
        self.status = Status::Inconclusive;
        self
    }

    pub fn to_json(&self, elapsed_ms: Option<f64>) -> Value {
        let mut out = Map::new();
        out.insert("command".into(), json!(self.command));
        if let Some(net) = &self.net {
            out.insert("net".into(), json!(net));
        }
        out.insert("query".into(), Value::Object(self.query.clone()));
        out.insert("params".into(), Value::Object(self.params.clone()));
        out.insert("result".into(), Value::Object(self.result.clone()));
        out.insert("warnings".into(), json!(self.warnings));
        if let Some(ms) = elapsed_ms {
            out.insert("timings".into(), json!({ "total_ms": ms }));
        }
        Value::Object(out)
    }
}

/// The witness as JSON after checking that it replays from `from` to a
/// marking accepted by `ends`. A witness that fails to replay is a bug, so
/// it is reported loudly instead of emitted.
pub fn witness(
    net: &Net,
    from: &Marking,
    seq: &AcceleratedSequence,
    ends: impl Fn(&Marking) -> bool,
) -> Value {
    match net.apply_sequence(from, seq) {
        Ok(m) if ends(&m) => json!({
            "blocks": net.sequence_to_json(seq),
            "accelerated_length": seq.accelerated_length(),
            "reaches": net.marking_to_json(&m),
        }),
        Ok(m) => panic!("witness ends in {m}, which does not answer the query"),
        Err(e) => panic!("witness does not replay: {e}"),
    }
}
