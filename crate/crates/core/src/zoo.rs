//! Built-in reference systems.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::sysfile::{AnalysisOptions, CancellationCondition, SystemFile};

/// Names of the built-in systems, in listing order.
pub const NAMES: [&str; 6] = ["damped-wave", "toy2x2", "toy3x3", "sugimoto", "timoshenko", "timoshenko-memory"];

fn rows(m: &[&[&str]]) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(|e| e.to_string()).collect()).collect()
}

fn params(p: &[(&str, &str)]) -> BTreeMap<String, String> {
    p.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn cancel(condition: &str, note: &str) -> Vec<CancellationCondition> {
    vec![CancellationCondition { condition: condition.into(), note: note.into() }]
}

struct Entry {
    name: &'static str,
    description: &'static str,
    parameters: &'static [(&'static str, &'static str)],
    a: &'static [&'static [&'static str]],
    ba: &'static [&'static [&'static str]],
    bs: &'static [&'static [&'static str]],
    cancellation: Option<(&'static str, &'static str)>,
}

const ENTRIES: [Entry; 6] = [
    Entry {
        name: "damped-wave",
        description: "weakly damped wave equation u_tt - u_xx + u_t = 0 in the variables (u_t, u_x)",
        parameters: &[],
        a: &[&["0", "1"], &["1", "0"]],
        ba: &[&["0", "0"], &["0", "0"]],
        bs: &[&["1", "0"], &["0", "0"]],
        cancellation: None,
    },
    Entry {
        name: "toy2x2",
        description: "two transport equations with speeds a, b coupled by a rotation; exponential decay iff a = b",
        parameters: &[("a", "1"), ("b", "2")],
        a: &[&["a", "0"], &["0", "b"]],
        ba: &[&["0", "1"], &["-1", "0"]],
        bs: &[&["1", "0"], &["0", "0"]],
        cancellation: Some(("a = b", "equal transport speeds")),
    },
    Entry {
        name: "toy3x3",
        description: "damped wave with speed a coupled to a transport equation with speed b",
        parameters: &[("a", "1"), ("b", "2")],
        a: &[&["0", "a", "0"], &["a", "0", "0"], &["0", "0", "b"]],
        ba: &[&["0", "0", "1"], &["0", "0", "0"], &["-1", "0", "0"]],
        bs: &[&["1", "0", "0"], &["0", "0", "0"], &["0", "0", "0"]],
        cancellation: Some(("a^2 = b^2", "equal wave and transport speeds")),
    },
    Entry {
        name: "sugimoto",
        description: "linearized Sugimoto model of acoustic waves in a tunnel, rescaled",
        parameters: &[("Omega", "1"), ("a", "1"), ("eps", "1"), ("omega", "1")],
        a: &[&["a", "0", "0"], &["0", "0", "0"], &["0", "0", "0"]],
        ba: &[&["0", "Omega", "0"], &["-Omega", "0", "omega"], &["0", "-omega", "0"]],
        bs: &[&["0", "0", "0"], &["0", "eps", "0"], &["0", "0", "0"]],
        cancellation: None,
    },
    Entry {
        name: "timoshenko",
        description: "dissipative Timoshenko beam with sound speed a and friction b",
        parameters: &[("a", "2"), ("b", "1")],
        a: &[&["0", "-1", "0", "0"], &["-1", "0", "0", "0"], &["0", "0", "0", "-a"], &["0", "0", "-a", "0"]],
        ba: &[&["0", "0", "0", "1"], &["0", "0", "0", "0"], &["0", "0", "0", "0"], &["-1", "0", "0", "0"]],
        bs: &[&["0", "0", "0", "0"], &["0", "0", "0", "0"], &["0", "0", "0", "0"], &["0", "0", "0", "b"]],
        cancellation: Some(("a^2 = 1", "equal wave speed")),
    },
    Entry {
        name: "timoshenko-memory",
        description: "Timoshenko beam with exponential memory kernel of rate mu",
        parameters: &[("c1", "1"), ("c2", "1"), ("mu", "1")],
        a: &[
            &["0", "0", "-1", "0", "0"],
            &["0", "0", "0", "-c1", "c2"],
            &["-1", "0", "0", "0", "0"],
            &["0", "-c1", "0", "0", "0"],
            &["0", "c2", "0", "0", "0"],
        ],
        ba: &[
            &["0", "1", "0", "0", "0"],
            &["-1", "0", "0", "0", "0"],
            &["0", "0", "0", "0", "0"],
            &["0", "0", "0", "0", "0"],
            &["0", "0", "0", "0", "0"],
        ],
        bs: &[
            &["0", "0", "0", "0", "0"],
            &["0", "0", "0", "0", "0"],
            &["0", "0", "0", "0", "0"],
            &["0", "0", "0", "0", "0"],
            &["0", "0", "0", "0", "mu"],
        ],
        cancellation: Some(("c1^2 + c2^2 = 1", "equal wave speed")),
    },
];

/// One-line description of a built-in system.
pub fn describe(name: &str) -> Result<&'static str> {
    ENTRIES.iter().find(|e| e.name == name).map(|e| e.description).ok_or_else(|| Error::UnknownModel(name.into()))
}

/// The system file of a built-in model at its default parameters.
pub fn model(name: &str) -> Result<SystemFile> {
    let e = ENTRIES.iter().find(|e| e.name == name).ok_or_else(|| Error::UnknownModel(name.into()))?;
    Ok(SystemFile {
        name: e.name.into(),
        description: e.description.into(),
        n: e.a.len(),
        parameters: params(e.parameters),
        a: rows(e.a),
        ba: rows(e.ba),
        bs: rows(e.bs),
        cancellations: e.cancellation.map(|(c, n)| cancel(c, n)).unwrap_or_default(),
        options: AnalysisOptions::default(),
    })
}

/// A built-in model with parameter overrides applied.
pub fn model_with(name: &str, overrides: &[(&str, &str)]) -> Result<SystemFile> {
    let mut f = model(name)?;
    for (k, v) in overrides {
        f.set_parameter(k, v)?;
    }
    Ok(f)
}

/// Loads `zoo:<name>` from the built-in models, anything else from disk.
pub fn load_source(source: &str) -> Result<SystemFile> {
    if let Some(name) = source.strip_prefix("zoo:") {
        return model(name);
    }
    let text = std::fs::read_to_string(source).map_err(|e| Error::Io(format!("{source}: {e}")))?;
    SystemFile::from_json(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{source}: {m}")),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_model_loads() {
        for name in NAMES {
            let f = model(name).unwrap();
            let sys = f.to_system().unwrap();
            assert_eq!(sys.n, f.n, "{name}");
            assert_eq!(SystemFile::from_json(&f.to_json()).unwrap(), f);
        }
        assert!(matches!(model("nope"), Err(Error::UnknownModel(_))));
    }

    #[test]
    fn cancellation_conditions_follow_parameters() {
        let f = model_with("timoshenko-memory", &[("c1", "3/5"), ("c2", "4/5")]).unwrap();
        assert_eq!(f.active_cancellations().unwrap().len(), 1);
        assert!(model("timoshenko").unwrap().active_cancellations().unwrap().is_empty());
    }
}
