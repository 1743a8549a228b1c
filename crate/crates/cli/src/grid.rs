use std::str::FromStr;

use srpat_core::simulate::{geometric_grid, validate_grid};

use crate::error::{CliError, CliResult};

/// Time (or vertex) grid requested on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    All,
    Geometric(f64),
    List(Vec<u64>),
}

impl FromStr for GridSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let bad = || CliError::Validation(format!("grid `{s}`: expected `geometric:<ratio>` or `list:<v1,v2,...>`"));
        if s == "all" {
            return Ok(GridSpec::All);
        }
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "geometric" => {
                let r: f64 = rest.trim().parse().map_err(|_| bad())?;
                if !(r > 1.0 && r.is_finite()) {
                    return Err(CliError::Validation(format!("geometric ratio must be a finite number > 1, got {rest}")));
                }
                Ok(GridSpec::Geometric(r))
            }
            "list" => {
                let v = rest
                    .split(',')
                    .map(|x| x.trim().parse::<u64>().map_err(|_| bad()))
                    .collect::<CliResult<Vec<u64>>>()?;
                Ok(GridSpec::List(v))
            }
            _ => Err(bad()),
        }
    }
}

impl GridSpec {
    /// Points in `[start, end]`, strictly increasing and ending at `end`.
    /// Lists must already end at `end`.
    pub fn resolve(&self, start: u64, end: u64) -> CliResult<Vec<u64>> {
        let g = match self {
            GridSpec::All => (start..=end).collect(),
            GridSpec::Geometric(r) => geometric_grid(start, end, *r),
            GridSpec::List(v) => v.clone(),
        };
        validate_grid(&g, end)?;
        Ok(g)
    }

    /// Echo form, the inverse of `from_str`.
    pub fn render(&self) -> String {
        match self {
            GridSpec::All => "all".into(),
            GridSpec::Geometric(r) => format!("geometric:{r}"),
            GridSpec::List(v) => format!("list:{}", join(v)),
        }
    }
}

pub fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}
