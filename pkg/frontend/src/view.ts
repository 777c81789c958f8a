import { ACTIONS, LABELS, AnnotationSubmission, AnnotationTask } from './schema.js';

export interface TaskViewHandles {
  root: HTMLElement;
  submitButton: HTMLButtonElement;
  errorBanner: HTMLElement;
  /** null until every action has a selection */
  collect(annotatorId: string): AnnotationSubmission | null;
}

function selectedLabel(root: HTMLElement, action: string): string | null {
  const checked = root.querySelector<HTMLInputElement>(
    `input[name="${action}"]:checked`,
  );
  return checked ? checked.value : null;
}

function allSelected(root: HTMLElement): boolean {
  return ACTIONS.every((action) => selectedLabel(root, action) !== null);
}

/**
 * Renders one task: scene image, text summary, and a 10-row by 3-option
 * label grid of radio groups (keyboard operable by construction). The
 * submit control stays disabled until all ten actions are labeled.
 */
export function renderTask(container: HTMLElement, task: AnnotationTask): TaskViewHandles {
  container.replaceChildren();

  const root = document.createElement('section');
  root.className = 'task';

  const heading = document.createElement('h2');
  heading.textContent = `Scene ${task.task_id}`;
  root.appendChild(heading);

  const image = document.createElement('img');
  image.alt = 'driving scene';
  image.className = 'scene-image';
  if (task.image_url) {
    image.src = task.image_url.startsWith('http')
      ? task.image_url
      : `/media/${task.task_id}`;
    image.onerror = () => {
      // Task stays completable without the image.
      const placeholder = document.createElement('p');
      placeholder.className = 'image-placeholder';
      placeholder.textContent = '[scene image unavailable]';
      image.replaceWith(placeholder);
    };
    root.appendChild(image);
  }

  const summary = document.createElement('p');
  summary.className = 'summary';
  summary.textContent = task.description;
  root.appendChild(summary);

  if (task.map_note) {
    const note = document.createElement('p');
    note.className = 'map-note';
    note.textContent = task.map_note;
    root.appendChild(note);
  }

  const errorBanner = document.createElement('div');
  errorBanner.className = 'error-banner';
  errorBanner.setAttribute('role', 'alert');
  errorBanner.hidden = true;
  root.appendChild(errorBanner);

  const table = document.createElement('table');
  table.className = 'label-grid';
  const header = document.createElement('tr');
  header.appendChild(document.createElement('th'));
  for (const label of LABELS) {
    const th = document.createElement('th');
    th.scope = 'col';
    th.textContent = label;
    header.appendChild(th);
  }
  table.appendChild(header);

  const submitButton = document.createElement('button');
  submitButton.type = 'button';
  submitButton.textContent = 'Submit annotations';
  submitButton.disabled = true;

  for (const action of ACTIONS) {
    const row = document.createElement('tr');
    const th = document.createElement('th');
    th.scope = 'row';
    th.textContent = action;
    row.appendChild(th);
    for (const label of LABELS) {
      const cell = document.createElement('td');
      const input = document.createElement('input');
      input.type = 'radio';
      input.name = action;
      input.value = label;
      input.setAttribute('aria-label', `${action}: ${label}`);
      input.addEventListener('change', () => {
        submitButton.disabled = !allSelected(root);
      });
      cell.appendChild(input);
      row.appendChild(cell);
    }
    table.appendChild(row);
  }
  root.appendChild(table);
  root.appendChild(submitButton);
  container.appendChild(root);

  return {
    root,
    submitButton,
    errorBanner,
    collect(annotatorId: string): AnnotationSubmission | null {
      if (!allSelected(root)) return null;
      const labels: Record<string, string> = {};
      for (const action of ACTIONS) {
        labels[action] = selectedLabel(root, action) as string;
      }
      return {
        task_id: task.task_id,
        annotator_id: annotatorId,
        labels,
        submitted_at: new Date().toISOString(),
      };
    },
  };
}

export function renderCompletion(container: HTMLElement): void {
  container.replaceChildren();
  const done = document.createElement('p');
  done.className = 'completion';
  done.textContent = 'All tasks complete. Thank you!';
  container.appendChild(done);
}

export function showError(handles: TaskViewHandles, message: string): void {
  handles.errorBanner.textContent = message;
  handles.errorBanner.hidden = false;
}
