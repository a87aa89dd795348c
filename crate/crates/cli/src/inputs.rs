//! Function, exponent and list arguments.

use std::path::Path;

use laplace_sums::{worked_example_f, PiecewiseFunction, ScaleExponent};

use crate::CliError;

pub const PRESETS: [&str; 3] = ["paper-example", "one", "linear"];

/// A preset name, inline JSON, or a path to a JSON file.
pub fn parse_function(arg: &str) -> Result<PiecewiseFunction, CliError> {
    match arg {
        "paper-example" => return Ok(worked_example_f()),
        "one" => return Ok(PiecewiseFunction::constant(1.0)),
        "linear" => return Ok(PiecewiseFunction::polynomial(vec![0.0, 1.0])),
        _ => {}
    }
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else if Path::new(arg).is_file() {
        std::fs::read_to_string(arg).map_err(|e| CliError::input(format!("cannot read {arg}: {e}")))?
    } else {
        return Err(CliError::input(format!(
            "'{arg}' is neither a preset ({}), inline JSON, nor a file",
            PRESETS.join(", ")
        )));
    };
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("malformed function JSON: {e}")))
}

pub fn parse_alpha(arg: &str) -> Result<ScaleExponent, CliError> {
    arg.parse().map_err(|e| CliError::input(format!("bad exponent '{arg}': {e}")))
}

/// Comma-separated list; an empty string is an empty list.
pub fn parse_list<T: std::str::FromStr>(arg: &str) -> Result<Vec<T>, CliError> {
    arg.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::input(format!("bad list entry '{s}'"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_and_json() {
        assert_eq!(parse_function("one").unwrap().eval(7.0), 1.0);
        assert_eq!(parse_function("linear").unwrap().eval(3.0), 3.0);
        assert_eq!(parse_function("paper-example").unwrap().eval(0.5), 0.0);
        let f = parse_function(r#"{"pieces":[{"a":0,"b":1,"coeffs":[1,2]}],"outside":"inf"}"#).unwrap();
        assert_eq!(f.eval(0.5), 2.0);
        assert_eq!(parse_function("{oops").unwrap_err().code, 2);
        assert_eq!(parse_function("no-such-preset").unwrap_err().code, 2);
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list::<u64>("").unwrap(), Vec::<u64>::new());
        assert_eq!(parse_list::<u64>("1, 2,3").unwrap(), vec![1, 2, 3]);
        assert!(parse_list::<u64>("1,x").is_err());
    }

    #[test]
    fn exact_half() {
        assert_eq!(parse_alpha("1/2").unwrap().ratio(), Some((1, 2)));
        assert!(parse_alpha("0").is_err());
    }
}
