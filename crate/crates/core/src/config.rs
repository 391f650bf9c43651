//! Configuration files and command-line overrides.
//!
//! A configuration file holds one command per line. The first token is the
//! command, the remaining tokens are its arguments; a `{...}` expression is a
//! single argument even if it contains whitespace. `#` starts a comment.
//!
//! On the command line the optional first argument names a configuration file
//! and `-command value...` pairs follow. Command-line entries are appended
//! after the file entries, so for scalar parameters the last occurrence (and
//! therefore the command line) wins.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::expr::{self, ExprError};
use crate::ComplexMatrix;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read '{0}': {1}")]
    Io(PathBuf, std::io::Error),
    #[error("line {line}: unterminated '{{' argument")]
    UnterminatedBrace { line: usize },
    #[error("line {line}: unbalanced '}}'")]
    UnbalancedBrace { line: usize },
    #[error("command-line option '{0}' needs a value")]
    MissingValue(String),
    #[error("unexpected command-line argument '{0}'")]
    UnexpectedArgument(String),
    #[error("'{command}' needs argument {index}")]
    MissingArgument { command: String, index: usize },
    #[error("'{command}': cannot convert '{value}' to {expected}")]
    Conversion { command: String, value: String, expected: &'static str },
    #[error("'{command}': {source}")]
    Expr { command: String, source: ExprError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    File,
    Cli,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub command: String,
    pub args: Vec<String>,
    pub origin: Origin,
}

/// Every command understood by the binaries.
pub const KNOWN_COMMANDS: &[&str] = &[
    "dt",
    "ta",
    "te",
    "outfile",
    "use_symmetric_Trotter",
    "propagate_alternate",
    "set_precision",
    "initial",
    "add_Hamiltonian",
    "add_Pulse",
    "add_Lindblad",
    "apply_Operator_left",
    "apply_Operator_right",
    "add_Output",
    "threshold",
    "t_mem",
    "n_mem",
    "threshold_range_factor",
    "forward_threshold_ratio",
    "backward_threshold_ratio",
    "select_threshold_ratio",
    "final_sweep_n",
    "final_sweep_threshold",
    "add_PT",
    "initial_PT",
    "write_PT",
    "buffer_blocksize",
    "use_combine_tree",
    "use_Gaussian",
    "use_Gaussian_divide_and_conquer",
    "use_Gaussian_periodic",
    "add_single_mode",
    "add_single_mode_from_file",
    "Boson_N_modes",
    "Boson_M",
    "Boson_SysOp",
    "Boson_J_from_file",
    "Boson_J_type",
    "Boson_J_a_e",
    "Boson_J_a_h",
    "Boson_g",
    "Boson_rate",
    "Boson_omega_min",
    "Boson_omega_max",
    "Boson_temperature",
    "Boson_subtract_polaron_shift",
    "Fermion_N_modes",
    "Fermion_M",
    "Fermion_SysOp",
    "Fermion_J_from_file",
    "Fermion_J_type",
    "Fermion_J_a_e",
    "Fermion_J_a_h",
    "Fermion_g",
    "Fermion_rate",
    "Fermion_omega_min",
    "Fermion_omega_max",
    "Fermion_temperature",
    "Fermion_subtract_polaron_shift",
    "Fermion_EFermi",
    "Fermion_E_Fermi",
];

/// Ordered multi-valued command store.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParameterMap {
    entries: Vec<Entry>,
}

/// Splits a configuration line into tokens, dropping comments.
pub fn tokenize_line(line: &str, lineno: usize) -> Result<Vec<String>, ConfigError> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    let mut depth = 0usize;
    for ch in line.chars() {
        match ch {
            '#' if depth == 0 => break,
            '{' => {
                depth += 1;
                cur.push(ch);
            }
            '}' => {
                if depth == 0 {
                    return Err(ConfigError::UnbalancedBrace { line: lineno });
                }
                depth -= 1;
                cur.push(ch);
            }
            c if c.is_whitespace() && depth == 0 => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if depth > 0 {
        return Err(ConfigError::UnterminatedBrace { line: lineno });
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    Ok(tokens)
}

fn is_option(token: &str) -> bool {
    let mut chars = token.chars();
    chars.next() == Some('-') && matches!(chars.next(), Some(c) if !c.is_ascii_digit() && c != '.')
}

impl ParameterMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse_str(text: &str, origin: Origin) -> Result<Self, ConfigError> {
        let mut map = ParameterMap::new();
        for (i, line) in text.lines().enumerate() {
            let mut tokens = tokenize_line(line, i + 1)?.into_iter();
            if let Some(command) = tokens.next() {
                map.push(command, tokens.collect(), origin);
            }
        }
        Ok(map)
    }

    pub fn push(&mut self, command: impl Into<String>, args: Vec<String>, origin: Origin) {
        self.entries.push(Entry { command: command.into(), args, origin });
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn last(&self, command: &str) -> Option<&Entry> {
        self.entries.iter().rev().find(|e| e.command == command)
    }

    pub fn all<'a>(&'a self, command: &'a str) -> impl Iterator<Item = &'a Entry> + 'a {
        self.entries.iter().filter(move |e| e.command == command)
    }

    pub fn contains(&self, command: &str) -> bool {
        self.last(command).is_some()
    }

    /// Commands not in [`KNOWN_COMMANDS`], in first-occurrence order.
    pub fn unknown_commands(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for e in &self.entries {
            if !KNOWN_COMMANDS.contains(&e.command.as_str()) && !out.contains(&e.command) {
                out.push(e.command.clone());
            }
        }
        out
    }

    /// First argument of the last occurrence of `command`.
    pub fn raw(&self, command: &str) -> Result<Option<&str>, ConfigError> {
        match self.last(command) {
            None => Ok(None),
            Some(e) => e
                .args
                .first()
                .map(|s| Some(s.as_str()))
                .ok_or(ConfigError::MissingArgument { command: command.into(), index: 1 }),
        }
    }

    pub fn get_f64_opt(&self, command: &str) -> Result<Option<f64>, ConfigError> {
        self.raw(command)?.map(|s| parse_scalar(command, s)).transpose()
    }

    pub fn get_f64(&self, command: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.get_f64_opt(command)?.unwrap_or(default))
    }

    pub fn get_usize_opt(&self, command: &str) -> Result<Option<usize>, ConfigError> {
        self.raw(command)?.map(|s| parse_count(command, s)).transpose()
    }

    pub fn get_usize(&self, command: &str, default: usize) -> Result<usize, ConfigError> {
        Ok(self.get_usize_opt(command)?.unwrap_or(default))
    }

    pub fn get_bool(&self, command: &str, default: bool) -> Result<bool, ConfigError> {
        match self.raw(command)? {
            None => Ok(default),
            Some(s) => parse_bool(command, s),
        }
    }

    pub fn get_string(&self, command: &str) -> Result<Option<String>, ConfigError> {
        Ok(self.raw(command)?.map(str::to_string))
    }

    pub fn get_matrix(&self, command: &str) -> Result<Option<ComplexMatrix>, ConfigError> {
        self.raw(command)?.map(|s| parse_matrix(command, s)).transpose()
    }

    /// One line per entry; re-parsing yields the same commands and arguments.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&e.command);
            for a in &e.args {
                let _ = write!(out, " {a}");
            }
            out.push('\n');
        }
        out
    }
}

/// Reads a configuration file.
pub fn parse_config_file(path: &Path) -> Result<ParameterMap, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
    ParameterMap::parse_str(&text, Origin::File)
}

/// Appends `-command value...` groups from `args` to `base`. A leading
/// argument that does not start with a dash is ignored here (it names the
/// configuration file, see [`from_args`]).
pub fn apply_cli(args: &[String], base: ParameterMap) -> Result<ParameterMap, ConfigError> {
    let mut map = base;
    let mut iter = args.iter().peekable();
    if let Some(first) = iter.peek() {
        if !first.starts_with('-') {
            iter.next();
        }
    }
    while let Some(tok) = iter.next() {
        if !is_option(tok) {
            return Err(ConfigError::UnexpectedArgument(tok.clone()));
        }
        let mut values = Vec::new();
        while let Some(v) = iter.peek() {
            if is_option(v) {
                break;
            }
            values.push(iter.next().expect("peeked").clone());
        }
        if values.is_empty() {
            return Err(ConfigError::MissingValue(tok.clone()));
        }
        map.push(&tok[1..], values, Origin::Cli);
    }
    Ok(map)
}

/// Builds the parameter map for `binary [file] -command value...`.
pub fn from_args(args: &[String]) -> Result<ParameterMap, ConfigError> {
    let base = match args.first() {
        Some(f) if !f.starts_with('-') => parse_config_file(Path::new(f))?,
        _ => ParameterMap::new(),
    };
    apply_cli(args, base)
}

/// A float literal or a 1×1 expression.
pub fn parse_scalar(command: &str, s: &str) -> Result<f64, ConfigError> {
    if s.trim_start().starts_with('{') {
        expr::scalar_from_expression(s).map_err(|source| ConfigError::Expr { command: command.into(), source })
    } else {
        s.parse::<f64>().map_err(|_| ConfigError::Conversion { command: command.into(), value: s.into(), expected: "float" })
    }
}

pub fn parse_count(command: &str, s: &str) -> Result<usize, ConfigError> {
    if let Ok(v) = s.parse::<usize>() {
        return Ok(v);
    }
    let x = parse_scalar(command, s)?;
    if x >= 0.0 && x.fract() == 0.0 && x < u32::MAX as f64 {
        Ok(x as usize)
    } else {
        Err(ConfigError::Conversion { command: command.into(), value: s.into(), expected: "non-negative integer" })
    }
}

pub fn parse_bool(command: &str, s: &str) -> Result<bool, ConfigError> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(ConfigError::Conversion { command: command.into(), value: s.into(), expected: "bool (true/false)" }),
    }
}

pub fn parse_matrix(command: &str, s: &str) -> Result<ComplexMatrix, ConfigError> {
    expr::eval_str(s).map_err(|source| ConfigError::Expr { command: command.into(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn lines() {
        let map = ParameterMap::parse_str("dt 0.01\nadd_Lindblad 0.1 {|0><1|_2}\nte 20 # comment\n\n# only\n", Origin::File)
            .unwrap();
        let e = map.entries();
        assert_eq!(e.len(), 3);
        assert_eq!((e[0].command.as_str(), e[0].args.clone()), ("dt", args(&["0.01"])));
        assert_eq!(e[1].args, args(&["0.1", "{|0><1|_2}"]));
        assert_eq!(e[2].args, args(&["20"]));
    }

    #[test]
    fn braces_with_whitespace() {
        let map = ParameterMap::parse_str("add_Hamiltonian {hbar/2 * ( |0><1|_2 + |1><0|_2 )} # x", Origin::File).unwrap();
        assert_eq!(map.entries()[0].args.len(), 1);
        assert!(map.get_matrix("add_Hamiltonian").unwrap().is_some());
        assert!(matches!(
            ParameterMap::parse_str("initial {|0><0|_2", Origin::File),
            Err(ConfigError::UnterminatedBrace { line: 1 })
        ));
    }

    #[test]
    fn cli_overrides_file() {
        let base = ParameterMap::parse_str("dt 0.1\nte 5", Origin::File).unwrap();
        let map = apply_cli(&args(&["example.param", "-dt", "0.01"]), base).unwrap();
        assert_eq!(map.get_f64("dt", 0.0).unwrap(), 0.01);
        assert_eq!(map.get_f64("te", 0.0).unwrap(), 5.0);
        assert_eq!(map.last("dt").unwrap().origin, Origin::Cli);
    }

    #[test]
    fn cli_expression_and_negative_values() {
        let map = apply_cli(&args(&["-te", "{2*pi}", "-ta", "-2000", "-add_Lindblad", "0.1", "{|0><1|_2}"]), ParameterMap::new())
            .unwrap();
        assert!((map.get_f64("te", 0.0).unwrap() - std::f64::consts::TAU).abs() < 1e-15);
        assert_eq!(map.get_f64("ta", 0.0).unwrap(), -2000.0);
        assert_eq!(map.last("add_Lindblad").unwrap().args.len(), 2);
        assert!(matches!(apply_cli(&args(&["-dt"]), ParameterMap::new()), Err(ConfigError::MissingValue(_))));
        assert!(apply_cli(&[], ParameterMap::new()).unwrap().entries().is_empty());
    }

    #[test]
    fn typed_resolution() {
        let map = ParameterMap::parse_str("use_combine_tree true\nBoson_M 4\nflag yes\n", Origin::File).unwrap();
        assert!(map.get_bool("use_combine_tree", false).unwrap());
        assert_eq!(map.get_usize("Boson_M", 2).unwrap(), 4);
        assert_eq!(map.get_f64("dt", 0.01).unwrap(), 0.01);
        assert!(map.get_bool("flag", false).is_err());
        assert_eq!(map.unknown_commands(), vec!["flag".to_string()]);
    }

    #[test]
    fn round_trip() {
        let text = "dt 0.01\nadd_Output {|1><1|_2}\nadd_Pulse Gauss 10 4 {3*pi} 0 {hbar/2*|1><0|_2}\n";
        let map = ParameterMap::parse_str(text, Origin::File).unwrap();
        let again = ParameterMap::parse_str(&map.to_config_string(), Origin::File).unwrap();
        assert_eq!(map, again);
    }
}
