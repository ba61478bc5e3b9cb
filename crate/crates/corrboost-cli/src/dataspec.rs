//! Dataset argument parsing. A dataset is named on the command line as a
//! single spec string:
//!
//! ```text
//! mnist:IMAGES:LABELS      IDX image/label pair
//! cifar10:B1,B2,...        CIFAR-10 binary batches
//! delimited:PATH           numeric table (see --delimiter/--label-column)
//! json:PATH                the JSON interchange format
//! ```

use std::path::PathBuf;

use corrboost::data::{
    load_cifar10, load_dataset_json, load_delimited, load_mnist_idx, Dataset, DelimitedOptions,
};
use corrboost::{Error, Result};

#[derive(Debug, Clone)]
pub enum DataSpec {
    Mnist { images: PathBuf, labels: PathBuf },
    Cifar10 { batches: Vec<PathBuf> },
    Delimited { path: PathBuf },
    Json { path: PathBuf },
}

/// Delimited-format flags shared by every command that loads data.
#[derive(Debug, Clone, clap::Args)]
pub struct DelimitedArgs {
    /// Field delimiter for delimited datasets.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,

    /// 1-based label column for delimited datasets.
    #[arg(long)]
    pub label_column: Option<usize>,

    /// Skip one header row in delimited datasets.
    #[arg(long)]
    pub header: bool,
}

impl std::str::FromStr for DataSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (format, rest) = s
            .split_once(':')
            .ok_or_else(|| format!("dataset spec {s:?} needs the form FORMAT:PATH[,...]"))?;
        match format {
            "mnist" => {
                let (images, labels) = rest
                    .split_once(':')
                    .ok_or_else(|| format!("mnist spec needs IMAGES:LABELS, got {rest:?}"))?;
                Ok(DataSpec::Mnist {
                    images: images.into(),
                    labels: labels.into(),
                })
            }
            "cifar10" => {
                let batches: Vec<PathBuf> = rest
                    .split(',')
                    .filter(|p| !p.is_empty())
                    .map(PathBuf::from)
                    .collect();
                if batches.is_empty() {
                    return Err("cifar10 spec needs at least one batch file".into());
                }
                Ok(DataSpec::Cifar10 { batches })
            }
            "delimited" => Ok(DataSpec::Delimited { path: rest.into() }),
            "json" => Ok(DataSpec::Json { path: rest.into() }),
            other => Err(format!(
                "unknown dataset format {other:?} (mnist, cifar10, delimited, json)"
            )),
        }
    }
}

impl DataSpec {
    /// Loads the dataset. `label_map` freezes the class-token mapping for
    /// delimited test files.
    pub fn load(&self, args: &DelimitedArgs, label_map: Option<Vec<String>>) -> Result<Dataset> {
        match self {
            DataSpec::Mnist { images, labels } => load_mnist_idx(images, labels),
            DataSpec::Cifar10 { batches } => load_cifar10(batches),
            DataSpec::Delimited { path } => {
                let label_column = args.label_column.ok_or_else(|| {
                    Error::InvalidConfig("--label-column is required for delimited datasets".into())
                })?;
                load_delimited(
                    path,
                    &DelimitedOptions {
                        delimiter: args.delimiter,
                        label_column,
                        has_header: args.header,
                        label_map,
                    },
                )
            }
            DataSpec::Json { path } => load_dataset_json(path),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            DataSpec::Mnist { images, labels } => {
                format!("mnist:{}:{}", images.display(), labels.display())
            }
            DataSpec::Cifar10 { batches } => format!(
                "cifar10:{}",
                batches
                    .iter()
                    .map(|p| p.display().to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            DataSpec::Delimited { path } => format!("delimited:{}", path.display()),
            DataSpec::Json { path } => format!("json:{}", path.display()),
        }
    }
}
