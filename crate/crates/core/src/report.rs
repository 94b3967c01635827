//! Versioned JSON envelopes and CSV helpers. All floating-point numbers are
//! written with 17 significant digits so that reports replay exactly;
//! non-finite values become `null` in JSON and `NaN`/`inf` in CSV.

use std::collections::BTreeMap;
use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "pqhyper";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Number formatting shared by JSON and CSV output.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Assumptions {
    /// The growth condition on `P` and `F` is declared by the caller and
    /// never verified.
    pub growth_condition: &'static str,
    pub notes: Vec<String>,
}

impl Assumptions {
    pub fn declared(growth_declared: bool) -> Self {
        Assumptions {
            growth_condition: if growth_declared { "declared" } else { "not declared" },
            notes: Vec::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

/// Top-level report: provenance, resolved configuration, tolerances,
/// assumptions and the command result.
#[derive(Clone, Debug, Serialize)]
pub struct Envelope<C: Serialize, R: Serialize> {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: C,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub assumptions: Assumptions,
    pub pass: bool,
    pub result: R,
}

impl<C: Serialize, R: Serialize> Envelope<C, R> {
    pub fn new(command: impl Into<String>, config: C, assumptions: Assumptions, pass: bool, result: R) -> Self {
        Envelope {
            schema: SCHEMA_VERSION,
            tool: TOOL,
            version: VERSION,
            command: command.into(),
            config,
            tolerances: BTreeMap::new(),
            assumptions,
            pass,
            result,
        }
    }

    pub fn tolerance(mut self, name: &'static str, value: f64) -> Self {
        self.tolerances.insert(name, value);
        self
    }
}

/// Pretty JSON formatter that writes every `f64` as `{:.16e}`.
struct Sig17Formatter<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.0.$name(w $(, $arg)*)
            }
        )*
    };
}

impl Formatter for Sig17Formatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format!("{value:.16e}").as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    );
}

/// Serializes `value` as pretty JSON with 17-significant-digit floats and
/// a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17Formatter(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .expect("report types serialize infallibly");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
