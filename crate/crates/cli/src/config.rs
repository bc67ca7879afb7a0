//! Flat `key = value` run configuration. Precedence: flags > file > defaults.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::Failure;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub command: Option<String>,
    pub system: Option<String>,
    pub params: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub json: bool,
    pub format: Option<String>,
    pub no_limit: bool,
    pub printed: bool,
    pub all: bool,
    pub section: Option<String>,
    pub lagrangian: Option<String>,
    pub vars: Option<String>,
    pub kernels: Option<String>,
    pub sources: Option<String>,
    pub expr: Option<String>,
}

fn flag(key: &str, v: &str) -> Result<bool, Failure> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Failure::Parse(format!("`{key}` expects true or false, got `{v}`"))),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let mut c = RunConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Failure::Parse(format!("config line {}: expected key = value", n + 1)))?;
            c.set(k.trim(), v.trim())
                .map_err(|e| Failure::Parse(format!("config line {}: {}", n + 1, e.message())))?;
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Parse(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, k: &str, v: &str) -> Result<(), Failure> {
        let s = || Some(v.to_string());
        match k {
            "command" => self.command = s(),
            "system" => self.system = s(),
            "seed" => {
                self.seed = Some(v.parse().map_err(|_| Failure::Parse(format!("seed must be an unsigned integer, got `{v}`")))?)
            }
            "out" => self.out = Some(PathBuf::from(v)),
            "json" => self.json = flag(k, v)?,
            "format" => self.format = s(),
            "no-limit" => self.no_limit = flag(k, v)?,
            "printed" => self.printed = flag(k, v)?,
            "all" => self.all = flag(k, v)?,
            "section" => self.section = s(),
            "lagrangian" => self.lagrangian = s(),
            "vars" => self.vars = s(),
            "kernels" => self.kernels = s(),
            "sources" => self.sources = s(),
            "expr" => self.expr = s(),
            // anything else is a system parameter, validated by the command
            _ => {
                if k.is_empty() {
                    return Err(Failure::Parse("empty key".into()));
                }
                self.params.insert(k.to_string(), v.to_string());
            }
        }
        Ok(())
    }

    /// Lay `over` on top of `self`: set values in `over` win.
    pub fn overlay(mut self, over: RunConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f; } )* };
        }
        take!(command, system, seed, out, format, section, lagrangian, vars, kernels, sources, expr);
        self.json |= over.json;
        self.no_limit |= over.no_limit;
        self.printed |= over.printed;
        self.all |= over.all;
        self.params.extend(over.params);
        self
    }

    /// Canonical text form; loading it reproduces this configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: &str| {
            let _ = writeln!(s, "{k} = {v}");
        };
        let opts = [
            ("command", &self.command),
            ("system", &self.system),
            ("format", &self.format),
            ("section", &self.section),
            ("lagrangian", &self.lagrangian),
            ("vars", &self.vars),
            ("kernels", &self.kernels),
            ("sources", &self.sources),
            ("expr", &self.expr),
        ];
        for (k, v) in opts {
            if let Some(v) = v {
                put(k, v);
            }
        }
        if let Some(seed) = self.seed {
            put("seed", &seed.to_string());
        }
        if let Some(out) = &self.out {
            put("out", &out.display().to_string());
        }
        for (k, v) in [("json", self.json), ("no-limit", self.no_limit), ("printed", self.printed), ("all", self.all)] {
            if v {
                put(k, "true");
            }
        }
        for (k, v) in &self.params {
            put(k, v);
        }
        s
    }
}
