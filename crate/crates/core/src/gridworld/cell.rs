use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    Empty,
    Wall,
    Door,
    Key,
    Goal,
    ResourceTree,
    ResourceStone,
    CraftingTable,
    Agent,
    ResourceDiamond,
}

impl ObjectKind {
    pub const ALL: [ObjectKind; 10] = [
        ObjectKind::Empty,
        ObjectKind::Wall,
        ObjectKind::Door,
        ObjectKind::Key,
        ObjectKind::Goal,
        ObjectKind::ResourceTree,
        ObjectKind::ResourceStone,
        ObjectKind::CraftingTable,
        ObjectKind::Agent,
        ObjectKind::ResourceDiamond,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoorState {
    Open,
    Closed,
    Locked,
}

/// One grid square. Door state is present only on doors and a color tag only
/// on keys and doors; the constructors are the only way to build a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    kind: ObjectKind,
    door_state: Option<DoorState>,
    color: Option<u8>,
}

pub const MAX_COLOR: u8 = 5;

impl Cell {
    pub const EMPTY: Cell = Cell::plain(ObjectKind::Empty);
    pub const WALL: Cell = Cell::plain(ObjectKind::Wall);
    pub const GOAL: Cell = Cell::plain(ObjectKind::Goal);
    pub const AGENT: Cell = Cell::plain(ObjectKind::Agent);

    /// Cell of a kind that carries no door state or color.
    ///
    /// Panics on `Door` and `Key`, which need [`Cell::door`] / [`Cell::key`].
    pub const fn plain(kind: ObjectKind) -> Cell {
        assert!(!matches!(kind, ObjectKind::Door | ObjectKind::Key));
        Cell {
            kind,
            door_state: None,
            color: None,
        }
    }

    pub fn door(state: DoorState, color: u8) -> Cell {
        assert!(color <= MAX_COLOR);
        Cell {
            kind: ObjectKind::Door,
            door_state: Some(state),
            color: Some(color),
        }
    }

    pub fn key(color: u8) -> Cell {
        assert!(color <= MAX_COLOR);
        Cell {
            kind: ObjectKind::Key,
            door_state: None,
            color: Some(color),
        }
    }

    pub fn kind(&self) -> ObjectKind {
        self.kind
    }

    pub fn door_state(&self) -> Option<DoorState> {
        self.door_state
    }

    pub fn color(&self) -> Option<u8> {
        self.color
    }

    /// Whether the agent may stand on this cell.
    pub fn walkable(&self) -> bool {
        match self.kind {
            ObjectKind::Empty | ObjectKind::Goal => true,
            ObjectKind::Door => self.door_state == Some(DoorState::Open),
            _ => false,
        }
    }

    /// Compact integer code: bits 0-3 kind, bits 4-5 door state (0 = none),
    /// bits 6-8 color plus one (0 = none).
    pub fn code(&self) -> u16 {
        let door = match self.door_state {
            None => 0,
            Some(DoorState::Open) => 1,
            Some(DoorState::Closed) => 2,
            Some(DoorState::Locked) => 3,
        };
        let color = self.color.map_or(0, |c| c as u16 + 1);
        self.kind as u16 | door << 4 | color << 6
    }

    pub fn from_code(code: u16) -> Option<Cell> {
        let kind = ObjectKind::from_index((code & 0xf) as usize)?;
        let door = match (code >> 4) & 0x3 {
            0 => None,
            1 => Some(DoorState::Open),
            2 => Some(DoorState::Closed),
            _ => Some(DoorState::Locked),
        };
        let color = match (code >> 6) & 0x7 {
            0 => None,
            c => Some(c as u8 - 1),
        };
        if code >> 9 != 0 {
            return None;
        }
        let cell = Cell {
            kind,
            door_state: door,
            color,
        };
        cell.is_well_formed().then_some(cell)
    }

    fn is_well_formed(&self) -> bool {
        let door_ok = self.door_state.is_some() == (self.kind == ObjectKind::Door);
        let color_ok =
            self.color.is_some() == matches!(self.kind, ObjectKind::Door | ObjectKind::Key);
        door_ok && color_ok && self.color.is_none_or(|c| c <= MAX_COLOR)
    }
}

impl Default for Cell {
    fn default() -> Self {
        Cell::EMPTY
    }
}

/// Items held by the agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Item {
    Key(u8),
    Wood,
    Stone,
    WoodPickaxe,
    StonePickaxe,
    Diamond,
}

impl Item {
    pub fn code(&self) -> u8 {
        match self {
            Item::Key(c) => *c,
            Item::Wood => 16,
            Item::Stone => 17,
            Item::WoodPickaxe => 18,
            Item::StonePickaxe => 19,
            Item::Diamond => 20,
        }
    }

    /// Bucket used by the feature binarizer; key colors share one slot.
    pub fn slot(&self) -> usize {
        match self {
            Item::Key(_) => 0,
            Item::Wood => 1,
            Item::Stone => 2,
            Item::WoodPickaxe => 3,
            Item::StonePickaxe => 4,
            Item::Diamond => 5,
        }
    }

    pub const SLOTS: usize = 6;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];

    /// (row, col) offset of one step forward.
    pub fn delta(self) -> (i64, i64) {
        match self {
            Direction::North => (-1, 0),
            Direction::East => (0, 1),
            Direction::South => (1, 0),
            Direction::West => (0, -1),
        }
    }

    pub fn right(self) -> Direction {
        Self::ALL[(self as usize + 1) % 4]
    }

    pub fn left(self) -> Direction {
        Self::ALL[(self as usize + 3) % 4]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    TurnLeft,
    TurnRight,
    Forward,
    Pickup,
    Toggle,
    Craft,
    Noop,
}

impl Action {
    pub const COUNT: usize = 7;
    pub const ALL: [Action; 7] = [
        Action::TurnLeft,
        Action::TurnRight,
        Action::Forward,
        Action::Pickup,
        Action::Toggle,
        Action::Craft,
        Action::Noop,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Self::ALL.get(i).copied()
    }
}
