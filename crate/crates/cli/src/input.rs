//! Loading nets, markings, cubes and histories from flags.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use bionet_core::countset::{CountsetError, Cube};
use bionet_core::explicit::SearchError;
use bionet_core::flat::FlatError;
use bionet_core::footprint::FootprintError;
use bionet_core::history::{default_decoration, BioHistory, Decoration, HistoryError};
use bionet_core::{fixtures, Marking, Net, NetError};

/// Failures that end a run before a report is produced.
#[derive(Debug)]
pub enum CliError {
    /// Flags that are well formed but inconsistent, such as caps that do
    /// not cover the queried markings.
    Usage(String),
    /// Input files or JSON arguments that cannot be used.
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Data(_) => 65,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "input error: {m}"),
        }
    }
}

impl From<NetError> for CliError {
    fn from(e: NetError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::CapMisconfigured { .. } => CliError::Usage(e.to_string()),
            SearchError::Net(e) => e.into(),
        }
    }
}

impl From<HistoryError> for CliError {
    fn from(e: HistoryError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<FlatError> for CliError {
    fn from(e: FlatError) -> Self {
        match e {
            FlatError::Search(e) => e.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

/// Instability is a report, not an error; callers handle it first.
impl From<FootprintError> for CliError {
    fn from(e: FootprintError) -> Self {
        match e {
            FootprintError::Search(e) => e.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<CountsetError> for CliError {
    fn from(e: CountsetError) -> Self {
        match e {
            CountsetError::Footprint(e) => e.into(),
            CountsetError::Net(e) => e.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// A net given as a path, as a name inside the fixtures directory, or as
/// the name of a built-in fixture.
pub fn load_net(spec: &str, fixtures_dir: Option<&Path>) -> Result<Net, CliError> {
    let direct = PathBuf::from(spec);
    if direct.is_file() {
        return Ok(Net::parse(&read(&direct)?)?);
    }
    if let Some(dir) = fixtures_dir {
        for candidate in [dir.join(spec), dir.join(format!("{spec}.json"))] {
            if candidate.is_file() {
                return Ok(Net::parse(&read(&candidate)?)?);
            }
        }
    }
    let name = spec.trim_end_matches(".json");
    fixtures::by_name(name).ok_or_else(|| CliError::Data(format!("{spec}: no such net file or fixture")))
}

/// Inline JSON when the argument starts like JSON, a file path otherwise.
pub fn json_text(arg: &str) -> Result<String, CliError> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        Ok(arg.to_string())
    } else {
        read(Path::new(arg))
    }
}

pub fn marking(net: &Net, arg: &str) -> Result<Marking, CliError> {
    Ok(net.parse_marking(&json_text(arg)?)?)
}

pub fn cube(net: &Net, arg: &str) -> Result<Cube, CliError> {
    Ok(Cube::parse(net, &json_text(arg)?)?)
}

pub fn history(net: &Net, arg: &str, decoration: Option<&str>) -> Result<(BioHistory, Decoration), CliError> {
    let h = BioHistory::parse(net, &json_text(arg)?)?;
    let d = match decoration {
        Some(arg) => Decoration::parse(&h, &json_text(arg)?)?,
        None => default_decoration(&h),
    };
    Ok((h, d))
}
