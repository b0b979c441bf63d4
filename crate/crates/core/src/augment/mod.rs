//! Test-time augmentation algebra, randomized training augmentation and
//! ground-truth paste with the end-of-training fade.

mod gtpaste;
mod random;
mod tta;

pub use gtpaste::{build_object_db, paste_objects, FadingSchedule, ObjectDbEntry, PasteOptions, Placement};
pub use random::{flip_scene, random_augment, AugmentParams, FlipAxis};
pub use tta::{apply_to_box, apply_to_cloud, inverse_to_box, tta_set, waymo_tta_set, TtaTransform};
