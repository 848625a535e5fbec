use argon2::password_hash::{PasswordHash, PasswordHasher, PasswordVerifier, SaltString};
use argon2::Argon2;
use rusqlite::{params, OptionalExtension};
use serde::Serialize;

use super::{Catalogue, CatalogueError, Result, Workspace, WorkspaceId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct UserProfile {
    pub user_id: String,
    pub full_name: String,
    pub institution: String,
    #[serde(skip)]
    pub password_hash: String,
}

/// A pragmatic address check: one `@`, a non-empty local part, and a dotted
/// domain with non-empty labels. No whitespace anywhere.
pub fn is_valid_email(email: &str) -> bool {
    let Some((local, domain)) = email.split_once('@') else {
        return false;
    };
    if local.is_empty() || domain.contains('@') || email.chars().any(char::is_whitespace) {
        return false;
    }
    let labels: Vec<&str> = domain.split('.').collect();
    labels.len() >= 2
        && labels
            .iter()
            .all(|l| !l.is_empty() && l.chars().all(|c| c.is_alphanumeric() || c == '-'))
}

fn hash_password(password: &str) -> Result<String> {
    let salt = SaltString::encode_b64(uuid::Uuid::new_v4().as_bytes())
        .map_err(|e| CatalogueError::StorageFailure(format!("salt: {e}")))?;
    Argon2::default()
        .hash_password(password.as_bytes(), &salt)
        .map(|h| h.to_string())
        .map_err(|e| CatalogueError::StorageFailure(format!("password hash: {e}")))
}

impl Catalogue {
    /// Registers a user keyed by lowercased email; returns that id.
    pub fn register_user(&self, email: &str, full_name: &str, institution: &str, password: &str) -> Result<String> {
        let user_id = email.trim().to_lowercase();
        if !is_valid_email(&user_id) {
            return Err(CatalogueError::InvalidEmail(email.to_string()));
        }
        let hash = hash_password(password)?;
        let conn = self.conn();
        let inserted = conn.execute(
            "INSERT INTO user_profile (user_id, full_name, institution, password_hash) VALUES (?1, ?2, ?3, ?4) \
             ON CONFLICT(user_id) DO NOTHING",
            params![user_id, full_name, institution, hash],
        )?;
        if inserted == 0 {
            return Err(CatalogueError::DuplicateUser(user_id));
        }
        Ok(user_id)
    }

    pub fn get_user(&self, email: &str) -> Result<Option<UserProfile>> {
        let user_id = email.trim().to_lowercase();
        let conn = self.conn();
        Ok(conn
            .query_row(
                "SELECT user_id, full_name, institution, password_hash FROM user_profile WHERE user_id = ?1",
                [user_id],
                |r| {
                    Ok(UserProfile {
                        user_id: r.get(0)?,
                        full_name: r.get(1)?,
                        institution: r.get(2)?,
                        password_hash: r.get(3)?,
                    })
                },
            )
            .optional()?)
    }

    /// True when the password matches. Unknown users simply fail; there is
    /// no lockout state.
    pub fn authenticate(&self, email: &str, password: &str) -> Result<bool> {
        let Some(user) = self.get_user(email)? else {
            return Ok(false);
        };
        let parsed = PasswordHash::new(&user.password_hash)
            .map_err(|e| CatalogueError::StorageFailure(format!("stored hash: {e}")))?;
        Ok(Argon2::default().verify_password(password.as_bytes(), &parsed).is_ok())
    }

    /// Workspaces owned by a user, ordered by id.
    pub fn workspaces_of(&self, email: &str) -> Result<Vec<Workspace>> {
        let user_id = email.trim().to_lowercase();
        if self.get_user(&user_id)?.is_none() {
            return Err(CatalogueError::UnknownUser(user_id));
        }
        let ids: Vec<i64> = {
            let conn = self.conn();
            let mut stmt =
                conn.prepare("SELECT workspace_id FROM workspace WHERE user_id = ?1 ORDER BY workspace_id")?;
            let rows = stmt.query_map([user_id], |r| r.get(0))?;
            rows.collect::<rusqlite::Result<_>>()?
        };
        ids.into_iter().map(|id| self.get_workspace(WorkspaceId(id))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn email_rules() {
        assert!(is_valid_email("a@b.org"));
        assert!(is_valid_email("first.last+tag@sub.example.edu"));
        for bad in ["", "a", "@b.org", "a@b", "a@@b.org", "a b@c.org", "a@.org", "a@b..org"] {
            assert!(!is_valid_email(bad), "{bad}");
        }
    }

    #[test]
    fn register_and_authenticate() {
        let cat = Catalogue::open_in_memory().unwrap();
        let id = cat.register_user("Ana@Example.org", "Ana", "Uni", "s3cret").unwrap();
        assert_eq!(id, "ana@example.org");
        assert!(cat.authenticate("ana@example.org", "s3cret").unwrap());
        assert!(!cat.authenticate("ana@example.org", "wrong").unwrap());
        assert!(cat.authenticate("ana@example.org", "s3cret").unwrap());
        assert!(!cat.authenticate("nobody@example.org", "s3cret").unwrap());
        let user = cat.get_user(&id).unwrap().unwrap();
        assert_ne!(user.password_hash, "s3cret");
        assert!(!user.password_hash.contains("s3cret"));
        assert!(matches!(
            cat.register_user("ana@example.org", "A", "U", "x"),
            Err(CatalogueError::DuplicateUser(_))
        ));
        assert!(matches!(
            cat.register_user("not-an-email", "A", "U", "x"),
            Err(CatalogueError::InvalidEmail(_))
        ));
    }
}
