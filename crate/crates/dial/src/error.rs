//! Error categories reported by the `dial` command. Each category has a
//! stable name and exit code; stderr carries `error[<name>]: <message>`.

use dial_core::aggregation::AggregationError;
use dial_core::scene::SceneError;
use dial_core::selection::SelectionError;
use dial_core::sim::SimError;
use dial_core::uncertainty::UncertaintyError;

use crate::config::ConfigError;
use crate::instance::InstanceError;
use crate::manifest::ManifestError;
use crate::poses::PoseError;
use crate::tensor::TensorError;
use crate::text::TextError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Io,
    Parse,
    Invalid,
    Infeasible,
}

impl Category {
    pub fn name(self) -> &'static str {
        match self {
            Category::Io => "io",
            Category::Parse => "parse",
            Category::Invalid => "invalid",
            Category::Infeasible => "infeasible",
        }
    }

    /// Usage errors exit with 2; the categories start above that.
    pub fn exit_code(self) -> u8 {
        match self {
            Category::Io => 3,
            Category::Parse => 4,
            Category::Invalid => 5,
            Category::Infeasible => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub category: Category,
    pub message: String,
}

impl CliError {
    pub fn new(category: Category, message: impl Into<String>) -> Self {
        CliError { category, message: message.into() }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError::new(Category::Io, format!("{}: {err}", path.display()))
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "error[{}]: {}", self.category.name(), self.message)
    }
}

impl std::error::Error for CliError {}

fn selection_category(e: &SelectionError) -> Category {
    match e {
        SelectionError::Infeasible(_) => Category::Infeasible,
        _ => Category::Invalid,
    }
}

macro_rules! categorize {
    ($($ty:ty => $cat:expr),* $(,)?) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                let category: fn(&$ty) -> Category = $cat;
                CliError::new(category(&e), e.to_string())
            }
        })*
    };
}

categorize! {
    PoseError => |_| Category::Parse,
    TextError => |_| Category::Parse,
    InstanceError => |e| match e {
        InstanceError::Invalid(s) => selection_category(s),
        _ => Category::Parse,
    },
    TensorError => |e| match e {
        TensorError::Io(_) => Category::Io,
        TensorError::Simplex { .. } | TensorError::Shape(_) => Category::Invalid,
        _ => Category::Parse,
    },
    ConfigError => |e| match e {
        ConfigError::Toml(_) => Category::Parse,
        _ => Category::Invalid,
    },
    ManifestError => |e| match e {
        ManifestError::Json { .. } | ManifestError::NoHeader | ManifestError::Structure { .. } | ManifestError::Version(_) => {
            Category::Parse
        }
        ManifestError::Sim(SimError::Selection(s)) => selection_category(s),
        _ => Category::Invalid,
    },
    SelectionError => selection_category,
    AggregationError => |_| Category::Invalid,
    SceneError => |_| Category::Invalid,
    UncertaintyError => |_| Category::Invalid,
    SimError => |e| match e {
        SimError::Selection(s) => selection_category(s),
        _ => Category::Invalid,
    },
}
