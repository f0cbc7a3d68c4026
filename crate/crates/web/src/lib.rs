//! Browser bindings. Each export takes and returns JSON text; the plain
//! functions in [`ops`] carry the logic so they can be tested natively.

use wasm_bindgen::prelude::*;

pub mod ops {
    use serde::Serialize;

    use mgtheta::hierarchy::{mtheta_bound, BoundOptions, LevelFamily};
    use mgtheta::{alpha, build_multigraph, instances, moment_theta, parse_expression, Error, ExclusivityMultigraph, NormalizationMode};

    #[derive(Serialize)]
    struct Factor<'a> {
        party: &'a str,
        edges: Vec<[usize; 2]>,
    }

    #[derive(Serialize)]
    struct IngestView<'a> {
        vertices: usize,
        table: String,
        factors: Vec<Factor<'a>>,
    }

    #[derive(Serialize)]
    struct ClassicalView {
        alpha: f64,
        witness: Vec<usize>,
        theta: f64,
    }

    fn multigraph(text: &str) -> Result<ExclusivityMultigraph, Error> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        if v.get("terms").is_some() {
            Ok(build_multigraph(&parse_expression(text)?).0)
        } else {
            ExclusivityMultigraph::from_json(text)
        }
    }

    pub fn instance_names() -> String {
        serde_json::to_string(&instances::NAMES).expect("serializable")
    }

    pub fn instance_source(name: &str) -> Result<String, Error> {
        instances::source(name).map(str::to_string).ok_or_else(|| Error::Unknown {
            kind: "instance",
            name: name.to_string(),
        })
    }

    /// Event table and factor edge lists (1-based) of an expression.
    pub fn ingest(expression: &str) -> Result<String, Error> {
        let (mg, table) = build_multigraph(&parse_expression(expression)?);
        let view = IngestView {
            vertices: mg.vertex_count(),
            table: table.render(),
            factors: mg
                .parties()
                .iter()
                .zip(mg.factors())
                .map(|(p, f)| Factor {
                    party: p,
                    edges: f.edges().iter().map(|&(a, b)| [a + 1, b + 1]).collect(),
                })
                .collect(),
        };
        Ok(serde_json::to_string(&view).expect("serializable"))
    }

    /// Independence number and Lovász number of the flattened graph.
    pub fn classical(input: &str) -> Result<String, Error> {
        let flat = multigraph(input)?.flatten();
        let a = alpha(&flat);
        let view = ClassicalView {
            alpha: a.value,
            witness: a.witness.iter().map(|v| v + 1).collect(),
            theta: moment_theta(&flat)?.value,
        };
        Ok(serde_json::to_string(&view).expect("serializable"))
    }

    /// Hierarchy bound; `level` is `1`, `1+AB`, `1.N` or an integer.
    pub fn mtheta(input: &str, level: &str, trials: usize, seed: u64, strict: bool) -> Result<String, Error> {
        let mg = multigraph(input)?;
        let mut opts = match level.strip_prefix("1.").map(str::parse::<usize>) {
            Some(Ok(x)) => BoundOptions::one_x(x, trials, seed),
            Some(Err(_)) => return Err(Error::Options(format!("bad level {level:?}"))),
            None => BoundOptions::level(level.parse::<LevelFamily>()?),
        };
        if strict {
            opts.mode = NormalizationMode::Strict;
        }
        Ok(mtheta_bound(&mg, &opts, "input")?.to_json())
    }
}

fn js(e: mgtheta::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = instanceNames)]
pub fn instance_names() -> String {
    ops::instance_names()
}

#[wasm_bindgen(js_name = instanceSource)]
pub fn instance_source(name: &str) -> Result<String, JsError> {
    ops::instance_source(name).map_err(js)
}

#[wasm_bindgen]
pub fn ingest(expression: &str) -> Result<String, JsError> {
    ops::ingest(expression).map_err(js)
}

#[wasm_bindgen]
pub fn classical(input: &str) -> Result<String, JsError> {
    ops::classical(input).map_err(js)
}

#[wasm_bindgen]
pub fn mtheta(input: &str, level: &str, trials: usize, seed: u64, strict: bool) -> Result<String, JsError> {
    ops::mtheta(input, level, trials, seed, strict).map_err(js)
}
