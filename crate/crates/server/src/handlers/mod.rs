pub mod accounts;
pub mod admin;
pub mod learning;
pub mod research;

/// Key for documents scoped to a user and another id.
pub(crate) fn scoped(user_id: &str, id: &str) -> String {
    format!("{user_id}:{id}")
}
