//! Pipeline driver behind the `morphcx` binary.

pub mod artifact;
pub mod commands;
pub mod config;
pub mod svg;

use config::ConfigError;

pub const EXIT_USAGE: i32 = 64;
pub const EXIT_PARSE: i32 = 65;
pub const EXIT_NO_DATA: i32 = 66;
pub const EXIT_INTERNAL: i32 = 70;
pub const EXIT_IO: i32 = 74;

/// Process exit status for an error: the first recognizable cause wins.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<morphcx::Error>() {
            return match e {
                morphcx::Error::Parse { .. }
                | morphcx::Error::Json(_)
                | morphcx::Error::Csv(_)
                | morphcx::Error::Invalid(_) => EXIT_PARSE,
                morphcx::Error::InsufficientData(_) | morphcx::Error::MissingScore(_) => EXIT_NO_DATA,
                morphcx::Error::Io(_) => EXIT_IO,
            };
        }
        if cause.is::<std::io::Error>() {
            return EXIT_IO;
        }
    }
    EXIT_INTERNAL
}
