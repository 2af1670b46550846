import { describe, expect, it } from "vitest";

import { keyAction } from "../src/keyboard.js";

describe("keyAction", () => {
  it.each([
    ["1", { kind: "label", value: 1 }],
    ["0", { kind: "label", value: 0 }],
    [" ", { kind: "replay" }],
    ["Spacebar", { kind: "replay" }],
    ["ArrowDown", { kind: "move", delta: 1 }],
    ["j", { kind: "move", delta: 1 }],
    ["ArrowUp", { kind: "move", delta: -1 }],
    ["k", { kind: "move", delta: -1 }],
  ] as const)("maps %j", (key, expected) => {
    expect(keyAction(key)).toEqual(expected);
  });

  it.each(["2", "Enter", "Escape", "a", "Tab"])("ignores %j", (key) => {
    expect(keyAction(key)).toBeNull();
  });

  it("never labels while typing in a form field", () => {
    expect(keyAction("1", "INPUT")).toBeNull();
    expect(keyAction("0", "TEXTAREA")).toBeNull();
    expect(keyAction(" ", "SELECT")).toBeNull();
    expect(keyAction("1", "DIV")).toEqual({ kind: "label", value: 1 });
  });
});
