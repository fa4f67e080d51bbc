//! In-process transport. Frames are stored serialized, so every hop goes
//! through the wire encoding.

use std::collections::{BTreeMap, VecDeque};

use super::message::{MessageKind, ProtocolMessage, Role};
use crate::error::{Error, Result};

#[derive(Debug, Default)]
pub struct MessageBus {
    queues: BTreeMap<Role, VecDeque<Vec<u8>>>,
}

/// Who may send a message kind, and to whom.
fn route_allowed(kind: MessageKind, from: Role, to: Role) -> bool {
    match kind {
        MessageKind::CipherColumn => from.is_curator() && to == Role::Server,
        MessageKind::KeyRelease => from.is_curator() && to == Role::Researcher,
        MessageKind::SamplingSeed => from.peer() == Some(to),
        MessageKind::SanitizedData | MessageKind::ChannelParams => {
            from == Role::Server && to == Role::Researcher
        }
    }
}

impl MessageBus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn send(&mut self, to: Role, msg: &ProtocolMessage) -> Result<()> {
        if !route_allowed(msg.kind, msg.sender, to) {
            return Err(Error::Protocol(format!(
                "{:?} from {:?} may not be delivered to {:?}",
                msg.kind, msg.sender, to
            )));
        }
        self.queues.entry(to).or_default().push_back(msg.encode());
        Ok(())
    }

    pub fn recv(&mut self, role: Role) -> Result<Option<ProtocolMessage>> {
        match self.queues.get_mut(&role).and_then(VecDeque::pop_front) {
            Some(frame) => ProtocolMessage::decode(&frame).map(Some),
            None => Ok(None),
        }
    }

    /// Raw frames waiting for `role`; lets tests inspect exactly what a role would see.
    pub fn pending_frames(&self, role: Role) -> impl Iterator<Item = &[u8]> {
        self.queues
            .get(&role)
            .into_iter()
            .flat_map(|q| q.iter().map(Vec::as_slice))
    }
}
