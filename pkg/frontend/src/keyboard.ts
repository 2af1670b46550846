export type KeyAction =
  | { kind: "label"; value: 0 | 1 }
  | { kind: "replay" }
  | { kind: "move"; delta: 1 | -1 };

/**
 * Map a keydown to an annotation action: 1/0 label the focused card (the
 * caller advances focus), space replays its audio, arrows or j/k move
 * focus. Keystrokes aimed at form fields are ignored so typing a rater id
 * never labels anything.
 */
export function keyAction(key: string, targetTag = ""): KeyAction | null {
  const tag = targetTag.toLowerCase();
  if (tag === "input" || tag === "textarea" || tag === "select") return null;
  switch (key) {
    case "1":
      return { kind: "label", value: 1 };
    case "0":
      return { kind: "label", value: 0 };
    case " ":
    case "Spacebar": // older engines
      return { kind: "replay" };
    case "ArrowDown":
    case "j":
      return { kind: "move", delta: 1 };
    case "ArrowUp":
    case "k":
      return { kind: "move", delta: -1 };
    default:
      return null;
  }
}
