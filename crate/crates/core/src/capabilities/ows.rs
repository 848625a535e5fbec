//! OWS Common service identification, shared by WFS 1.1+/WCS 2/CSW/WPS.

use roxmltree::Node;

use super::xml::{child, list, path, path_text};
use super::ServiceMeta;

pub(crate) fn service_metadata(root: Node<'_, '_>) -> ServiceMeta {
    let mut meta = ServiceMeta::default();
    if let Some(ident) = child(root, "ServiceIdentification") {
        meta.title = path_text(ident, &["Title"]);
        meta.abstract_text = path_text(ident, &["Abstract"]);
        meta.keywords = list(ident, "Keywords", "Keyword");
    }
    if let Some(provider) = child(root, "ServiceProvider") {
        meta.provider_name = path_text(provider, &["ProviderName"]);
        let person = path_text(provider, &["ServiceContact", "IndividualName"]);
        let email = path_text(
            provider,
            &["ServiceContact", "ContactInfo", "Address", "ElectronicMailAddress"],
        );
        meta.contact = contact_string(&person, &email);
        if meta.provider_name.is_empty() {
            if let Some(site) = path(provider, &["ProviderSite"]) {
                meta.provider_name = site
                    .attributes()
                    .find(|a| a.name() == "href")
                    .map(|a| a.value().trim().to_string())
                    .unwrap_or_default();
            }
        }
    }
    meta
}

/// Joins a contact name and e-mail address into one display string.
pub(crate) fn contact_string(person: &str, email: &str) -> Option<String> {
    match (person.is_empty(), email.is_empty()) {
        (true, true) => None,
        (false, true) => Some(person.to_string()),
        (true, false) => Some(email.to_string()),
        (false, false) => Some(format!("{person} <{email}>")),
    }
}
