//! `key = value` run files. Keys are the long flag names; flags given on the
//! command line win.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use cavity_core::Error;

#[derive(Debug, Default)]
pub struct FileLayer {
    values: BTreeMap<String, String>,
}

impl FileLayer {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("config line {}: expected key = value", n + 1)))?;
            let k = k.trim().trim_start_matches("--").replace('_', "-");
            values.insert(k, v.trim().to_string());
        }
        Ok(Self { values })
    }

    /// Rejects keys the current subcommand does not know.
    pub fn check_keys(&self, known: &[&str]) -> Result<(), Error> {
        match self.values.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(Error::Usage(format!("unknown config key '{k}'"))),
            None => Ok(()),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, Error>
    where
        T::Err: std::fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::Usage(format!("config key '{key}': {e}")))
            })
            .transpose()
    }

    pub fn flag(&self, key: &str) -> Result<bool, Error> {
        Ok(self.get::<bool>(key)?.unwrap_or(false))
    }
}

/// Command-line value, else file value, else `None`.
pub fn pick<T: FromStr>(cli: Option<T>, file: &FileLayer, key: &str) -> Result<Option<T>, Error>
where
    T::Err: std::fmt::Display,
{
    match cli {
        Some(v) => Ok(Some(v)),
        None => file.get(key),
    }
}

/// Comma-separated list.
#[derive(Clone, Debug, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: std::fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let items = s
            .split(',')
            .map(|x| x.trim())
            .filter(|x| !x.is_empty())
            .map(|x| x.parse::<T>().map_err(|e| format!("'{x}': {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        if items.is_empty() {
            return Err("empty list".to_string());
        }
        Ok(List(items))
    }
}

/// A positive integer or `auto`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Auto {
    Auto,
    Fixed(u32),
}

impl FromStr for Auto {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Auto::Auto);
        }
        s.parse::<u32>()
            .map(Auto::Fixed)
            .map_err(|_| format!("expected a nonnegative integer or 'auto', got '{s}'"))
    }
}

/// Inclusive integer range `lo:hi`, or a single integer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Span(pub i32, pub i32);

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |x: &str| x.trim().parse::<i32>().map_err(|e| format!("'{x}': {e}"));
        match s.split_once(':') {
            Some((a, b)) => Ok(Span(parse(a)?, parse(b)?)),
            None => {
                let x = parse(s)?;
                Ok(Span(x, x))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_files() {
        let f = FileLayer::parse("# run\nmodel = dimer\n--dim=3\nno_memo = true # off\n").unwrap();
        assert_eq!(f.get::<String>("model").unwrap().as_deref(), Some("dimer"));
        assert_eq!(f.get::<usize>("dim").unwrap(), Some(3));
        assert!(f.flag("no-memo").unwrap());
        assert!(f.check_keys(&["model", "dim"]).is_err());
        assert!(FileLayer::parse("garbage").is_err());
    }

    #[test]
    fn cli_wins() {
        let f = FileLayer::parse("dim = 3").unwrap();
        assert_eq!(pick(Some(2usize), &f, "dim").unwrap(), Some(2));
        assert_eq!(pick(None::<usize>, &f, "dim").unwrap(), Some(3));
    }

    #[test]
    fn value_syntax() {
        assert_eq!("0.5, 1,2".parse::<List<f64>>().unwrap(), List(vec![0.5, 1.0, 2.0]));
        assert!("".parse::<List<f64>>().is_err());
        assert_eq!("auto".parse::<Auto>().unwrap(), Auto::Auto);
        assert_eq!("14".parse::<Auto>().unwrap(), Auto::Fixed(14));
        assert_eq!("-1:2".parse::<Span>().unwrap(), Span(-1, 2));
        assert_eq!("0".parse::<Span>().unwrap(), Span(0, 0));
    }
}
