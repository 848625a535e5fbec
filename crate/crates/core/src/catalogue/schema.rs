pub(crate) const SCHEMA: &str = r#"
PRAGMA foreign_keys = ON;

CREATE TABLE IF NOT EXISTS data_source_catalogue (
    service_id      INTEGER PRIMARY KEY,
    url             TEXT NOT NULL UNIQUE,
    service_type    TEXT NOT NULL,
    version         TEXT NOT NULL,
    title           TEXT NOT NULL,
    abstract        TEXT NOT NULL,
    keywords        TEXT NOT NULL,
    provider_name   TEXT NOT NULL,
    contact         TEXT,
    latitude        REAL NOT NULL,
    longitude       REAL NOT NULL,
    country         TEXT NOT NULL,
    score           REAL NOT NULL DEFAULT 0,
    discovered_at   INTEGER NOT NULL,
    last_probed_at  INTEGER
);

CREATE TABLE IF NOT EXISTS layer (
    layer_id        INTEGER PRIMARY KEY,
    service_id      INTEGER NOT NULL REFERENCES data_source_catalogue(service_id) ON DELETE RESTRICT,
    name            TEXT NOT NULL,
    url             TEXT NOT NULL,
    supported_srs   TEXT NOT NULL,
    bbox            TEXT,
    symbol          TEXT,
    quality_score   REAL NOT NULL DEFAULT 0,
    owner_user_id   TEXT REFERENCES user_profile(user_id),
    UNIQUE (service_id, name)
);

CREATE TABLE IF NOT EXISTS layer_metadata (
    layer_id        INTEGER PRIMARY KEY REFERENCES layer(layer_id) ON DELETE CASCADE,
    title           TEXT NOT NULL,
    abstract        TEXT NOT NULL,
    keywords        TEXT NOT NULL,
    formats         TEXT NOT NULL,
    time_extent     TEXT
);

CREATE TABLE IF NOT EXISTS user_profile (
    user_id         TEXT PRIMARY KEY,
    full_name       TEXT NOT NULL,
    institution     TEXT NOT NULL,
    password_hash   TEXT NOT NULL
);

CREATE TABLE IF NOT EXISTS workspace (
    workspace_id    INTEGER PRIMARY KEY,
    user_id         TEXT NOT NULL REFERENCES user_profile(user_id),
    workspacedata   BLOB NOT NULL
);

CREATE TABLE IF NOT EXISTS workspace_layer (
    workspace_id    INTEGER NOT NULL REFERENCES workspace(workspace_id) ON DELETE CASCADE,
    layer_id        INTEGER NOT NULL REFERENCES layer(layer_id) ON DELETE RESTRICT,
    display_order   INTEGER NOT NULL,
    PRIMARY KEY (workspace_id, layer_id),
    UNIQUE (workspace_id, display_order)
);

CREATE TABLE IF NOT EXISTS data_analysis (
    profile_id       TEXT PRIMARY KEY,
    service_name     TEXT NOT NULL,
    service_url      TEXT NOT NULL,
    inputs           TEXT NOT NULL,
    outputs          TEXT NOT NULL,
    rule_description TEXT NOT NULL,
    constraints      TEXT NOT NULL,
    bound_layer_id   INTEGER REFERENCES layer(layer_id) ON DELETE SET NULL
);

CREATE TABLE IF NOT EXISTS probe_sample (
    sample_id       INTEGER PRIMARY KEY,
    service_id      INTEGER NOT NULL REFERENCES data_source_catalogue(service_id) ON DELETE CASCADE,
    timestamp_ms    INTEGER NOT NULL,
    latency_ms      INTEGER,
    http_status     INTEGER
);

CREATE INDEX IF NOT EXISTS probe_sample_service ON probe_sample(service_id, sample_id);
"#;
