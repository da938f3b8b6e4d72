//! Line-delimited action traces.
//!
//! One record per action: step, item id, action, from-stage, to-stage,
//! confidence, strength. Flat policies report their single store as
//! "flat"; absent stages are "-".

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub step: u32,
    pub item: String,
    pub action: &'static str,
    pub from: &'static str,
    pub to: &'static str,
    pub c: Option<f64>,
    pub m: Option<f64>,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn num(v: Option<f64>) -> String {
            match v {
                Some(x) => format!("{x:.4}"),
                None => "-".to_string(),
            }
        }
        write!(
            f,
            "step={} item={} action={} from={} to={} c={} m={}",
            self.step,
            self.item,
            self.action,
            self.from,
            self.to,
            num(self.c),
            num(self.m)
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub enabled: bool,
}

impl Trace {
    pub fn new(enabled: bool) -> Self {
        Trace { records: Vec::new(), enabled }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push(
        &mut self,
        step: u32,
        item: impl Into<String>,
        action: &'static str,
        from: &'static str,
        to: &'static str,
        c: Option<f64>,
        m: Option<f64>,
    ) {
        if self.enabled {
            self.records.push(TraceRecord {
                step,
                item: item.into(),
                action,
                from,
                to,
                c,
                m,
            });
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }
}
