use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Error => "ERROR",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChamberDump {
    pub v_lo: String,
    pub v_hi: String,
    pub support: Vec<String>,
    pub volume: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_dot: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_ord: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceDump {
    pub u: String,
    pub chambers: Vec<ChamberDump>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseResult {
    pub id: String,
    pub description: String,
    pub tags: Vec<String>,
    pub provenance: String,
    pub anchor: String,
    pub expected: Vec<String>,
    /// Exact value as `"p/q"`, or a label; absent on error.
    pub computed: Option<String>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chambers: Option<Vec<SliceDump>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub error: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub cases: Vec<CaseResult>,
    pub summary: Summary,
}

impl Report {
    pub fn new(cases: Vec<CaseResult>) -> Report {
        let mut summary = Summary {
            total: cases.len(),
            ..Summary::default()
        };
        for c in &cases {
            match c.status {
                Status::Pass => summary.pass += 1,
                Status::Fail => summary.fail += 1,
                Status::Error => summary.error += 1,
            }
        }
        Report { cases, summary }
    }

    /// 0 when everything passed, 2 on any error, otherwise 1.
    pub fn exit_code(&self) -> i32 {
        exit_code(self.cases.iter().map(|c| c.status))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let s = &self.summary;
        writeln!(
            out,
            "# Verification report\n\n{} cases: {} pass, {} fail, {} error\n",
            s.total, s.pass, s.fail, s.error
        )
        .unwrap();
        out.push_str("| id | status | computed | expected | provenance | anchor |\n");
        out.push_str("|---|---|---|---|---|---|\n");
        for c in &self.cases {
            writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} |",
                c.id,
                c.status.as_str(),
                escape(c.computed.as_deref().unwrap_or("-")),
                escape(&c.expected.join(", ")),
                c.provenance,
                escape(&c.anchor),
            )
            .unwrap();
        }
        let annotated: Vec<&CaseResult> = self
            .cases
            .iter()
            .filter(|c| c.detail.is_some() || !c.notes.is_empty())
            .collect();
        if !annotated.is_empty() {
            out.push_str("\n## Notes\n\n");
            for c in annotated {
                if let Some(d) = &c.detail {
                    writeln!(out, "- `{}` {}: {d}", c.id, c.status.as_str()).unwrap();
                }
                for n in &c.notes {
                    writeln!(out, "- `{}`: {n}", c.id).unwrap();
                }
            }
        }
        out
    }
}

pub fn exit_code(statuses: impl IntoIterator<Item = Status>) -> i32 {
    let mut code = 0;
    for s in statuses {
        match s {
            Status::Error => return 2,
            Status::Fail => code = 1,
            Status::Pass => {}
        }
    }
    code
}

fn escape(s: &str) -> String {
    s.replace('|', "\\|")
}
