import { beforeEach, describe, expect, it } from 'vitest';

import { ACTIONS, LABELS, AnnotationTask, validateSubmission } from '../src/schema.js';
import { renderCompletion, renderTask, showError } from '../src/view.js';

const TASK: AnnotationTask = {
  task_id: 't001',
  description:
    'The ego vehicle approaches a busy urban intersection with pedestrians waiting at the crosswalk.',
  image_url: 't001.jpg',
  agent_types: ['VEHICLE', 'PEDESTRIAN'],
  relative_positions: ['FRONT', 'FRONT_RIGHT'],
  map_note: 'The ego vehicle is approaching a signalized intersection.',
  actions: [...ACTIONS],
};

let container: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = '<main id="app"></main>';
  container = document.getElementById('app') as HTMLElement;
});

function check(root: HTMLElement, action: string, label: string): void {
  const input = root.querySelector<HTMLInputElement>(
    `input[name="${action}"][value="${label}"]`,
  );
  if (!input) throw new Error(`no radio for ${action}/${label}`);
  input.checked = true;
  input.dispatchEvent(new Event('change', { bubbles: true }));
}

describe('renderTask', () => {
  it('renders a 10-by-3 grid of selectable radio cells', () => {
    const handles = renderTask(container, TASK);
    const radios = handles.root.querySelectorAll('input[type="radio"]');
    expect(radios).toHaveLength(30);
    for (const action of ACTIONS) {
      const group = handles.root.querySelectorAll(
        `input[name="${action}"]`,
      );
      expect(group).toHaveLength(3);
      expect([...group].map((r) => (r as HTMLInputElement).value)).toEqual([
        ...LABELS,
      ]);
    }
  });

  it('keeps submission blocked until all ten actions are labeled', () => {
    const handles = renderTask(container, TASK);
    expect(handles.submitButton.disabled).toBe(true);
    expect(handles.collect('annotator-7')).toBeNull();
    for (const action of ACTIONS.slice(0, 9)) {
      check(handles.root, action, 'SAFE');
    }
    expect(handles.submitButton.disabled).toBe(true);
    expect(handles.collect('annotator-7')).toBeNull();
    check(handles.root, ACTIONS[9], 'REASONABLE');
    expect(handles.submitButton.disabled).toBe(false);
  });

  it('collects a submission the shared validator accepts', () => {
    const handles = renderTask(container, TASK);
    for (const action of ACTIONS) {
      check(handles.root, action, 'UNSAFE');
    }
    check(handles.root, 'NUDGE LEFT', 'REASONABLE');
    const submission = handles.collect('annotator-7');
    expect(submission).not.toBeNull();
    expect(validateSubmission(submission!)).toEqual([]);
    expect(submission!.task_id).toBe('t001');
    expect(submission!.annotator_id).toBe('annotator-7');
    expect(submission!.labels['NUDGE LEFT']).toBe('REASONABLE');
    expect(submission!.labels['STOP']).toBe('UNSAFE');
  });

  it('renders scene text and keeps the error banner hidden until shown', () => {
    const handles = renderTask(container, TASK);
    expect(handles.root.textContent).toContain(TASK.description);
    expect(handles.root.textContent).toContain(TASK.map_note);
    expect(handles.errorBanner.hidden).toBe(true);
    showError(handles, 'CONFLICT: already submitted');
    expect(handles.errorBanner.hidden).toBe(false);
    expect(handles.errorBanner.textContent).toBe('CONFLICT: already submitted');
    expect(handles.errorBanner.getAttribute('role')).toBe('alert');
  });

  it('preserves selections when an error is shown', () => {
    const handles = renderTask(container, TASK);
    for (const action of ACTIONS) {
      check(handles.root, action, 'SAFE');
    }
    showError(handles, 'PROVIDER_ERROR: upstream unavailable');
    const submission = handles.collect('annotator-7');
    expect(submission).not.toBeNull();
    expect(Object.values(submission!.labels)).toEqual(
      Array(10).fill('SAFE'),
    );
  });

  it('omits the image element when the task has no image', () => {
    const handles = renderTask(container, { ...TASK, image_url: null });
    expect(handles.root.querySelector('img')).toBeNull();
  });
});

describe('renderCompletion', () => {
  it('replaces the task with a completion message', () => {
    renderTask(container, TASK);
    renderCompletion(container);
    expect(container.querySelectorAll('input')).toHaveLength(0);
    expect(container.textContent).toContain('All tasks complete');
  });
});
