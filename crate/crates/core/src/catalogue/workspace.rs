use std::io::{Read, Write};

use flate2::read::DeflateDecoder;
use flate2::write::DeflateEncoder;
use flate2::Compression;
use rusqlite::{params, OptionalExtension, Transaction};
use serde::{Deserialize, Serialize};

use super::{Catalogue, CatalogueError, LayerId, Result, Symbol, WorkspaceId};

/// The workspace document stored in the `workspacedata` column and handed to
/// clients. Entries are kept in ascending display order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Workspace {
    pub workspace_id: WorkspaceId,
    pub name: String,
    pub default_srs: String,
    pub layers: Vec<WorkspaceLayer>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct WorkspaceLayer {
    pub layer_id: LayerId,
    pub display_order: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub style_override: Option<Symbol>,
}

impl Workspace {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("workspace documents always serialize")
    }

    fn check(&self) -> Result<()> {
        for pair in self.layers.windows(2) {
            if pair[0].display_order >= pair[1].display_order {
                return Err(CatalogueError::MalformedDocument(format!(
                    "display orders must be strictly ascending, found {} then {}",
                    pair[0].display_order, pair[1].display_order
                )));
            }
        }
        let mut ids: Vec<LayerId> = self.layers.iter().map(|l| l.layer_id).collect();
        ids.sort();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(CatalogueError::MalformedDocument("a layer appears twice".into()));
        }
        for entry in &self.layers {
            if let Some(style) = &entry.style_override {
                style
                    .validate()
                    .map_err(|e| CatalogueError::MalformedDocument(e.to_string()))?;
            }
        }
        Ok(())
    }
}

/// Parses a workspace document. Unknown keys, duplicate layers and unsorted
/// display orders are rejected.
pub fn load_workspace(json: &str) -> Result<Workspace> {
    let ws: Workspace = serde_json::from_str(json).map_err(|e| CatalogueError::MalformedDocument(e.to_string()))?;
    ws.check()?;
    Ok(ws)
}

const RAW: u8 = 0;
const DEFLATE: u8 = 1;

fn encode(ws: &Workspace, compress: bool) -> Result<Vec<u8>> {
    let json = ws.to_json();
    if !compress {
        let mut out = Vec::with_capacity(json.len() + 1);
        out.push(RAW);
        out.extend_from_slice(json.as_bytes());
        return Ok(out);
    }
    let mut enc = DeflateEncoder::new(vec![DEFLATE], Compression::default());
    enc.write_all(json.as_bytes())
        .and_then(|_| enc.finish())
        .map_err(|e| CatalogueError::StorageFailure(format!("deflate: {e}")))
}

fn decode(blob: &[u8]) -> Result<Workspace> {
    let (header, body) = blob
        .split_first()
        .ok_or_else(|| CatalogueError::MalformedDocument("empty workspacedata".into()))?;
    let json = match *header {
        RAW => String::from_utf8(body.to_vec()).map_err(|e| CatalogueError::MalformedDocument(e.to_string()))?,
        DEFLATE => {
            let mut out = String::new();
            DeflateDecoder::new(body)
                .read_to_string(&mut out)
                .map_err(|e| CatalogueError::MalformedDocument(format!("inflate: {e}")))?;
            out
        }
        other => {
            return Err(CatalogueError::MalformedDocument(format!(
                "unknown header byte {other}"
            )))
        }
    };
    load_workspace(&json)
}

fn read_workspace(tx: &Transaction<'_>, id: WorkspaceId) -> Result<Workspace> {
    let blob: Option<Vec<u8>> = tx
        .query_row(
            "SELECT workspacedata FROM workspace WHERE workspace_id = ?1",
            [id.0],
            |r| r.get(0),
        )
        .optional()?;
    decode(&blob.ok_or(CatalogueError::UnknownWorkspace(id))?)
}

impl Catalogue {
    pub fn create_workspace(&self, email: &str, name: &str, default_srs: &str) -> Result<WorkspaceId> {
        let user_id = email.trim().to_lowercase();
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        let known: Option<i64> = tx
            .query_row("SELECT 1 FROM user_profile WHERE user_id = ?1", [&user_id], |r| {
                r.get(0)
            })
            .optional()?;
        if known.is_none() {
            return Err(CatalogueError::UnknownUser(user_id));
        }
        tx.execute(
            "INSERT INTO workspace (user_id, workspacedata) VALUES (?1, ?2)",
            params![user_id, vec![RAW]],
        )?;
        let id = WorkspaceId(tx.last_insert_rowid());
        let ws = Workspace {
            workspace_id: id,
            name: name.to_string(),
            default_srs: default_srs.to_string(),
            layers: Vec::new(),
        };
        tx.execute(
            "UPDATE workspace SET workspacedata = ?2 WHERE workspace_id = ?1",
            params![id.0, encode(&ws, self.compress_workspaces)?],
        )?;
        tx.commit()?;
        Ok(id)
    }

    pub fn get_workspace(&self, id: WorkspaceId) -> Result<Workspace> {
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        read_workspace(&tx, id)
    }

    /// Owner (user id) of a workspace.
    pub fn workspace_owner(&self, id: WorkspaceId) -> Result<String> {
        self.conn()
            .query_row("SELECT user_id FROM workspace WHERE workspace_id = ?1", [id.0], |r| {
                r.get(0)
            })
            .optional()?
            .ok_or(CatalogueError::UnknownWorkspace(id))
    }

    pub fn serialize_workspace(&self, id: WorkspaceId) -> Result<String> {
        Ok(self.get_workspace(id)?.to_json())
    }

    pub fn add_layer_to_workspace(&self, id: WorkspaceId, layer: LayerId, display_order: u32) -> Result<Workspace> {
        self.add_styled_layer_to_workspace(id, layer, display_order, None)
    }

    /// Links a layer into a workspace. Only the link is recorded; the layer
    /// row itself is untouched.
    pub fn add_styled_layer_to_workspace(
        &self,
        id: WorkspaceId,
        layer: LayerId,
        display_order: u32,
        style: Option<Symbol>,
    ) -> Result<Workspace> {
        if let Some(s) = &style {
            s.validate()?;
        }
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        let mut ws = read_workspace(&tx, id)?;
        let exists: Option<i64> = tx
            .query_row("SELECT 1 FROM layer WHERE layer_id = ?1", [layer.0], |r| r.get(0))
            .optional()?;
        if exists.is_none() {
            return Err(CatalogueError::UnknownLayer(layer));
        }
        if ws.layers.iter().any(|l| l.layer_id == layer) {
            return Err(CatalogueError::AlreadyLinked { workspace: id, layer });
        }
        if ws.layers.iter().any(|l| l.display_order == display_order) {
            return Err(CatalogueError::DisplayOrderConflict {
                workspace: id,
                order: display_order,
            });
        }
        let at = ws.layers.partition_point(|l| l.display_order < display_order);
        ws.layers.insert(
            at,
            WorkspaceLayer {
                layer_id: layer,
                display_order,
                style_override: style,
            },
        );
        tx.execute(
            "INSERT INTO workspace_layer (workspace_id, layer_id, display_order) VALUES (?1, ?2, ?3)",
            params![id.0, layer.0, display_order],
        )?;
        tx.execute(
            "UPDATE workspace SET workspacedata = ?2 WHERE workspace_id = ?1",
            params![id.0, encode(&ws, self.compress_workspaces)?],
        )?;
        tx.commit()?;
        Ok(ws)
    }

    /// Removes only the workspace-to-layer link.
    pub fn remove_layer_from_workspace(&self, id: WorkspaceId, layer: LayerId) -> Result<Workspace> {
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        let mut ws = read_workspace(&tx, id)?;
        let Some(pos) = ws.layers.iter().position(|l| l.layer_id == layer) else {
            return Err(CatalogueError::LinkNotFound { workspace: id, layer });
        };
        ws.layers.remove(pos);
        tx.execute(
            "DELETE FROM workspace_layer WHERE workspace_id = ?1 AND layer_id = ?2",
            params![id.0, layer.0],
        )?;
        tx.execute(
            "UPDATE workspace SET workspacedata = ?2 WHERE workspace_id = ?1",
            params![id.0, encode(&ws, self.compress_workspaces)?],
        )?;
        tx.commit()?;
        Ok(ws)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Workspace {
        Workspace {
            workspace_id: WorkspaceId(7),
            name: "Arctic".into(),
            default_srs: "EPSG:3413".into(),
            layers: vec![
                WorkspaceLayer {
                    layer_id: LayerId(3),
                    display_order: 1,
                    style_override: None,
                },
                WorkspaceLayer {
                    layer_id: LayerId(1),
                    display_order: 4,
                    style_override: Some(Symbol {
                        opacity: Some(0.5),
                        color: Some("#ff0000".into()),
                        size: None,
                    }),
                },
            ],
        }
    }

    #[test]
    fn codec_round_trip() {
        for compress in [false, true] {
            let ws = sample();
            let blob = encode(&ws, compress).unwrap();
            assert_eq!(blob[0], u8::from(compress));
            assert_eq!(decode(&blob).unwrap(), ws);
        }
    }

    #[test]
    fn document_shape() {
        let v: serde_json::Value = serde_json::from_str(&sample().to_json()).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 4);
        assert_eq!(v["layers"][0], serde_json::json!({"layerId": 3, "displayOrder": 1}));
        assert_eq!(v["layers"][1]["styleOverride"]["opacity"], 0.5);
    }

    #[test]
    fn load_rejects_bad_documents() {
        let bad = [
            r#"{"workspaceId":1,"name":"a","defaultSrs":"x","layers":[],"extra":1}"#,
            r#"{"workspaceId":1,"name":"a","defaultSrs":"x"}"#,
            r#"{"workspaceId":1,"name":"a","defaultSrs":"x","layers":[{"layerId":1,"displayOrder":2},{"layerId":2,"displayOrder":1}]}"#,
            r#"{"workspaceId":1,"name":"a","defaultSrs":"x","layers":[{"layerId":1,"displayOrder":1},{"layerId":1,"displayOrder":2}]}"#,
            r#"{"workspaceId":1,"name":"a","defaultSrs":"x","layers":[{"layerId":1,"displayOrder":1,"style":{}}]}"#,
            "not json",
        ];
        for doc in bad {
            assert!(
                matches!(load_workspace(doc), Err(CatalogueError::MalformedDocument(_))),
                "{doc}"
            );
        }
    }
}
