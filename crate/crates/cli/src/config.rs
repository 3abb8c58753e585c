//! Flat `key = value` configuration files. Lines starting with `#` and blank
//! lines are ignored; command-line flags override file values.

use std::path::PathBuf;

/// Every field is optional so that a file and the flags can be layered.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    pub scenario: Option<String>,
    pub grid: Option<[usize; 3]>,
    /// Check names, or `["all"]`.
    pub checks: Option<Vec<String>>,
    pub tol_scale: Option<f64>,
    pub dt: Option<f64>,
    pub out: Option<PathBuf>,
    pub no_timestamp: Option<bool>,
    pub seed: Option<u64>,
    /// Sweep axis: `grid`, `dt` or `amplitude`.
    pub axis: Option<String>,
    pub values: Option<Vec<f64>>,
    pub quantity: Option<String>,
}

pub const KEYS: [&str; 11] = [
    "scenario",
    "grid",
    "checks",
    "tol_scale",
    "dt",
    "out",
    "no_timestamp",
    "seed",
    "axis",
    "values",
    "quantity",
];

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

pub fn parse_grid(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("grid needs three comma-separated sizes, got `{s}`"));
    }
    let mut out = [0; 3];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| format!("bad grid size `{p}`"))?;
    }
    Ok(out)
}

pub fn parse_list(s: &str) -> Vec<String> {
    s.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect()
}

pub fn parse_values(s: &str) -> Result<Vec<f64>, String> {
    parse_list(s)
        .iter()
        .map(|p| p.parse::<f64>().map_err(|_| format!("bad number `{p}`")))
        .collect()
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got `{s}`")),
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse().map_err(|_| format!("bad number `{s}`"))
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = Config::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| ConfigError { line: n + 1, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "scenario" => c.scenario = Some(value.to_string()),
                "grid" => c.grid = Some(parse_grid(value).map_err(err)?),
                "checks" => c.checks = Some(parse_list(value)),
                "tol_scale" => c.tol_scale = Some(parse_f64(value).map_err(err)?),
                "dt" => c.dt = Some(parse_f64(value).map_err(err)?),
                "out" => c.out = Some(PathBuf::from(value)),
                "no_timestamp" => c.no_timestamp = Some(parse_bool(value).map_err(err)?),
                "seed" => c.seed = Some(value.parse().map_err(|_| err(format!("bad seed `{value}`")))?),
                "axis" => c.axis = Some(value.to_string()),
                "values" => c.values = Some(parse_values(value).map_err(err)?),
                "quantity" => c.quantity = Some(value.to_string()),
                other => {
                    return Err(err(format!("unknown key `{other}` (known: {})", KEYS.join(", "))));
                }
            }
        }
        Ok(c)
    }

    /// Fields set in `over` win.
    pub fn overlay(self, over: Config) -> Config {
        Config {
            scenario: over.scenario.or(self.scenario),
            grid: over.grid.or(self.grid),
            checks: over.checks.or(self.checks),
            tol_scale: over.tol_scale.or(self.tol_scale),
            dt: over.dt.or(self.dt),
            out: over.out.or(self.out),
            no_timestamp: over.no_timestamp.or(self.no_timestamp),
            seed: over.seed.or(self.seed),
            axis: over.axis.or(self.axis),
            values: over.values.or(self.values),
            quantity: over.quantity.or(self.quantity),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_all_keys() {
        let text = "# run\nscenario = tilted\ngrid = 32, 32,48\nchecks = contact,rescale\n\
                    tol_scale=2\ndt = 1e-3\nout = r.json\nno_timestamp = true\nseed = 9\n\
                    axis = grid\nvalues = 32,48,64\nquantity = rw-gap\n";
        let c = Config::parse(text).unwrap();
        assert_eq!(c.grid, Some([32, 32, 48]));
        assert_eq!(c.checks.as_deref(), Some(&["contact".to_string(), "rescale".to_string()][..]));
        assert_eq!(c.values, Some(vec![32.0, 48.0, 64.0]));
        assert_eq!(c.no_timestamp, Some(true));
        assert_eq!(c.seed, Some(9));
    }

    #[test]
    fn errors_name_the_line() {
        let e = Config::parse("scenario = a\n\ncolour = red").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("colour"));
        assert!(Config::parse("grid = 1,2").is_err());
        assert!(Config::parse("just words").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = Config { scenario: Some("a".into()), dt: Some(1.0), ..Default::default() };
        let flags = Config { scenario: Some("b".into()), ..Default::default() };
        let c = file.overlay(flags);
        assert_eq!(c.scenario.as_deref(), Some("b"));
        assert_eq!(c.dt, Some(1.0));
    }

    proptest! {
        #[test]
        fn grid_round_trips(a in 1usize..500, b in 1usize..500, c in 1usize..500) {
            prop_assert_eq!(parse_grid(&format!("{a},{b} , {c}")).unwrap(), [a, b, c]);
        }
    }
}
