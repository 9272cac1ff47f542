/**
 * Message schema of the haptic service: one JSON object per line/frame.
 *
 * Every outgoing command funnels through the builder functions here, which
 * throw on anything that would violate the wire schema, so a message that
 * leaves the workbench is valid by construction (and the test suite checks
 * the builders themselves).
 */

export type Plane = "xz" | "yz";

export type Texture = "none" | "L1_glass" | "L2_wood" | "L3_steel";

export interface SceneObjectJson {
  kind: "sphere" | "cube" | "cylinder";
  center: [number, number, number];
  size: number | [number, number];
  stiffness?: number;
  texture?: Texture;
  texture_gain?: number;
}

export interface StateMessage {
  type: "state";
  t: number;
  finger: [number, number, number];
  f_desired: number;
  f_achieved: number;
  duty: number[];
  currents: number[];
  contact: boolean;
  infeasible: boolean;
}

export interface SceneMessage {
  type: "scene";
  objects: SceneObjectJson[];
}

export interface FieldSliceData {
  type: "field_slice_data";
  plane: Plane;
  n: number;
  extent: [number, number, number, number];
  values: number[];
}

export interface ErrorMessage {
  type: "error";
  msg: string;
}

export type ServerMessage = StateMessage | SceneMessage | FieldSliceData | ErrorMessage;

const TEXTURES: Texture[] = ["none", "L1_glass", "L2_wood", "L3_steel"];
const KINDS = ["sphere", "cube", "cylinder"];

function isVec3(value: unknown): value is [number, number, number] {
  return (
    Array.isArray(value) &&
    value.length === 3 &&
    value.every((c) => typeof c === "number" && Number.isFinite(c))
  );
}

function isNumberArray(value: unknown, length: number): value is number[] {
  return (
    Array.isArray(value) &&
    value.length === length &&
    value.every((c) => typeof c === "number" && Number.isFinite(c))
  );
}

// ---------------------------------------------------------------- outgoing

export function setPosition(p: [number, number, number]): object {
  if (!isVec3(p)) throw new Error("set_position needs a finite [x, y, z]");
  return { type: "set_position", p };
}

export function loadScene(objects: SceneObjectJson[]): object {
  if (!Array.isArray(objects) || objects.length === 0) {
    throw new Error("load_scene needs at least one object");
  }
  for (const obj of objects) validateSceneObject(obj);
  return { type: "load_scene", objects };
}

export interface Params {
  stiffness?: number;
  texture?: Texture;
  tau?: number;
}

export function setParams(params: Params): object {
  const out: Record<string, unknown> = { type: "set_params" };
  if (params.stiffness !== undefined) {
    if (!(params.stiffness > 0)) throw new Error("stiffness must be positive");
    out.stiffness = params.stiffness;
  }
  if (params.tau !== undefined) {
    if (!(params.tau > 0)) throw new Error("tau must be positive");
    out.tau = params.tau;
  }
  if (params.texture !== undefined) {
    if (!TEXTURES.includes(params.texture)) throw new Error("unknown texture");
    out.texture = params.texture;
  }
  if (Object.keys(out).length === 1) throw new Error("set_params is empty");
  return out;
}

export function fieldSlice(plane: Plane, n: number): object {
  if (plane !== "xz" && plane !== "yz") throw new Error("plane must be xz or yz");
  if (!Number.isInteger(n) || n < 4 || n > 128) throw new Error("n must be 4..128");
  return { type: "field_slice", plane, n };
}

export function validateSceneObject(obj: SceneObjectJson): void {
  if (!KINDS.includes(obj.kind)) throw new Error(`unknown kind ${obj.kind}`);
  if (!isVec3(obj.center)) throw new Error("center must be [x, y, z]");
  if (obj.kind === "cylinder") {
    if (!isNumberArray(obj.size, 2) || obj.size[0] <= 0 || obj.size[1] <= 0) {
      throw new Error("cylinder size must be [diameter, length]");
    }
  } else if (typeof obj.size !== "number" || obj.size <= 0) {
    throw new Error("size must be a positive number");
  }
  if (obj.stiffness !== undefined && !(obj.stiffness > 0)) {
    throw new Error("stiffness must be positive");
  }
  if (obj.texture !== undefined && !TEXTURES.includes(obj.texture)) {
    throw new Error("unknown texture");
  }
}

// ---------------------------------------------------------------- incoming

export function parseServerMessage(line: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null) return null;
  const msg = raw as Record<string, unknown>;
  switch (msg.type) {
    case "state":
      if (
        typeof msg.t === "number" &&
        isVec3(msg.finger) &&
        typeof msg.f_desired === "number" &&
        typeof msg.f_achieved === "number" &&
        isNumberArray(msg.duty, 6) &&
        isNumberArray(msg.currents, 6) &&
        typeof msg.contact === "boolean" &&
        typeof msg.infeasible === "boolean"
      ) {
        return msg as unknown as StateMessage;
      }
      return null;
    case "scene":
      return Array.isArray(msg.objects) ? (msg as unknown as SceneMessage) : null;
    case "field_slice_data":
      if (
        typeof msg.n === "number" &&
        Array.isArray(msg.values) &&
        msg.values.length === msg.n * msg.n &&
        isNumberArray(msg.extent, 4)
      ) {
        return msg as unknown as FieldSliceData;
      }
      return null;
    case "error":
      return typeof msg.msg === "string" ? (msg as unknown as ErrorMessage) : null;
    default:
      return null;
  }
}

// ---------------------------------------------------------------- presets

/** Scene presets parked where the stack has comfortable force authority. */
export function scenePreset(
  kind: "sphere" | "cube" | "cylinder",
  texture: Texture,
  stiffness: number,
): SceneObjectJson[] {
  const base = { stiffness, texture };
  switch (kind) {
    case "sphere":
      return [{ kind, center: [0.05, 0.0, 0.0625], size: 0.1, ...base }];
    case "cube":
      return [{ kind, center: [0.0, 0.0, 0.0575], size: 0.1, ...base }];
    case "cylinder":
      return [{ kind, center: [0.0, 0.0, 0.0575], size: [0.1, 0.1], ...base }];
  }
}
