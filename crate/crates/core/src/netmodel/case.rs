//! JSON case files.
//!
//! ```json
//! { "buses": [ {"id": 0, "v_min": 1.0, "v_max": 1.0},
//!              {"id": 1, "s_min": [-0.1, -0.05], "s_max": [-0.1, -0.05],
//!               "v_min": 0.81, "v_max": 1.21} ],
//!   "lines": [ {"from": 0, "to": 1, "z": [0.01, 0.02]} ] }
//! ```
//!
//! Complex numbers are `[re, im]`; a `null` component is an infinite bound. Missing
//! injection bounds are unbounded. Missing voltage bounds default to `[0.81, 1.21]`
//! except at the slack bus, which defaults to `v0` (optional top-level field, 1.0).
//! The optional per-bus `cost` weights real injection in generation-cost objectives.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Bus, CaseError, Line, Network, DEFAULT_V_MAX, DEFAULT_V_MIN};

type Bound = [Option<f64>; 2];

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v0: Option<f64>,
    buses: Vec<BusRecord>,
    lines: Vec<LineRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BusRecord {
    id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s_min: Option<Bound>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s_max: Option<Bound>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cost: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineRecord {
    from: usize,
    to: usize,
    z: [f64; 2],
}

fn decode_bound(b: Option<Bound>, fill: f64) -> Complex64 {
    match b {
        None => Complex64::new(fill, fill),
        Some([re, im]) => Complex64::new(re.unwrap_or(fill), im.unwrap_or(fill)),
    }
}

fn encode_bound(s: Complex64) -> Option<Bound> {
    let part = |x: f64| x.is_finite().then_some(x);
    match (part(s.re), part(s.im)) {
        (None, None) => None,
        (re, im) => Some([re, im]),
    }
}

/// Parses and validates a JSON case file.
pub fn parse_case(text: &str) -> Result<Network, CaseError> {
    let file: CaseFile = serde_json::from_str(text).map_err(|e| CaseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let v0 = file.v0.unwrap_or(1.0);
    let buses = file
        .buses
        .into_iter()
        .map(|b| {
            let (dmin, dmax) = if b.id == 0 { (v0, v0) } else { (DEFAULT_V_MIN, DEFAULT_V_MAX) };
            Bus {
                id: b.id,
                s_min: decode_bound(b.s_min, f64::NEG_INFINITY),
                s_max: decode_bound(b.s_max, f64::INFINITY),
                v_min: b.v_min.unwrap_or(dmin),
                v_max: b.v_max.unwrap_or(dmax),
                cost: b.cost.unwrap_or(1.0),
            }
        })
        .collect();
    let lines = file
        .lines
        .into_iter()
        .map(|l| Line::new(l.from, l.to, Complex64::new(l.z[0], l.z[1])))
        .collect();
    Network::new(buses, lines, v0)
}

/// Writes a network in the case-file schema accepted by [`parse_case`].
pub fn serialize_case(net: &Network) -> String {
    let file = CaseFile {
        v0: (net.v0() != 1.0).then_some(net.v0()),
        buses: net
            .buses()
            .iter()
            .map(|b| BusRecord {
                id: b.id,
                s_min: encode_bound(b.s_min),
                s_max: encode_bound(b.s_max),
                v_min: Some(b.v_min),
                v_max: Some(b.v_max),
                cost: (b.cost != 1.0).then_some(b.cost),
            })
            .collect(),
        lines: net
            .lines()
            .iter()
            .map(|l| LineRecord {
                from: l.from,
                to: l.to,
                z: [l.z.re, l.z.im],
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("case file serialization is infallible")
}
