//! Config documents, the bundled fixture, and data export.

mod config;
mod export;

pub use config::{
    fixture, load_config, load_config_file, load_document, serialize_config, ConfigDocument,
    Meta, FIXTURE_JSON, FIXTURE_NAME,
};
pub use export::{
    format_value, read_table, read_table_file, write_json, write_table, write_table_file,
};
